#pragma once

#include <map>
#include <string>

#include "roadtwin/cluster.hpp"
#include "roadtwin/extract.hpp"
#include "roadtwin/mesh.hpp"
#include "roadtwin/metrics.hpp"

namespace roadtwin {

struct PipelineConfig {
    PreprocessParams preprocess;
    std::map<Semantic, ClusterParams> cluster = default_cluster_params();
    ExtractConfig extract;
    MeshOptions mesh;
    MeshFormat format = MeshFormat::OBJ;
    int threads = 0;  // 0 = hardware concurrency
    std::string segment_name = "seg";
    bool eval_raw_gt = false;  // evaluate against raw instead of preprocessed points

    /// Strict parse: unknown keys anywhere raise ConfigError with their path.
    static PipelineConfig from_json(const Json& j);
    Json to_json() const;
};

/// Stage outputs live under <out_dir>/<stage>/ with a manifest.json each;
/// every stage reads exactly the previous stage's directory.
void stage_segment(const std::string& cloud_path, const std::string& out_dir,
                   const PipelineConfig& cfg);
void stage_extract(const std::string& out_dir, const PipelineConfig& cfg);
void stage_build(const std::string& out_dir, const PipelineConfig& cfg);
DistanceReport stage_evaluate(const std::string& out_dir, const PipelineConfig& cfg);
void stage_report(const std::string& out_dir, const PipelineConfig& cfg);
void stage_run(const std::string& cloud_path, const std::string& out_dir,
               const PipelineConfig& cfg);

}  // namespace roadtwin
