#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gck/error.hpp"
#include "gck/mlp.hpp"
#include "gck/pipeline.hpp"
#include "gck/sign.hpp"

namespace gck {
namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("gck_pipeline_" + name);
    fs::remove_all(p);
    return p;
}

Dataset small_sbm(std::uint64_t seed = 1) {
    SbmParams p;
    p.num_nodes = 600;
    p.p_in = 0.04;
    p.p_out = 0.004;
    p.mean_separation = 0.5;
    p.seed = seed;
    return generate_sbm(p);
}

PipelineConfig small_config() {
    PipelineConfig c;
    c.eta = 20;
    c.epochs = 30;
    c.hidden = {32};
    c.seed = 5;
    return c;
}

TEST(Pipeline, FullAndHalfBudgetBothComplete) {
    const auto data = small_sbm();
    auto cfg = small_config();
    const auto full = run_pipeline(cfg, data);
    EXPECT_EQ(full.psi, full.training_nodes);
    EXPECT_EQ(full.survivor_count, full.training_nodes);
    EXPECT_EQ(full.l_err, 0.0);
    cfg.psi_fraction = 0.5;
    const auto half = run_pipeline(cfg, data);
    EXPECT_EQ(half.psi, full.training_nodes / 2);
    EXPECT_EQ(half.survivor_count, half.psi);
    for (const auto* r : {&full, &half}) {
        EXPECT_TRUE(r->manifest["metrics"]["val"].is_object());
        EXPECT_TRUE(r->manifest["metrics"]["test"].is_object());
        EXPECT_GT(r->val.accuracy, 0.5);
        EXPECT_GT(r->manifest["runtime"]["peak_rss_bytes"].get<std::size_t>(), 0u);
    }
}

TEST(Pipeline, DeterministicModuloRuntime) {
    const auto data = small_sbm();
    auto cfg = small_config();
    cfg.psi_fraction = 0.4;
    cfg.zeta = Measure::Betweenness;
    cfg.bc_sample_size = 64;
    const auto a = run_pipeline(cfg, data);
    const auto b = run_pipeline(cfg, data);
    EXPECT_EQ(deterministic_part(a.manifest).dump(), deterministic_part(b.manifest).dump());
    EXPECT_FALSE(deterministic_part(a.manifest).contains("runtime"));
}

TEST(Pipeline, ArtifactsExistAndReparse) {
    const auto dir = fresh_dir("artifacts");
    const auto data = small_sbm(2);
    fs::create_directories(dir);
    save_dataset(dataset_paths_in(dir.string(), "in"), data);
    auto cfg = small_config();
    cfg.paths = dataset_paths_in(dir.string(), "in");
    cfg.psi = 150;
    cfg.out_dir = (dir / "out").string();
    const auto report = run_pipeline(cfg);

    const fs::path out(cfg.out_dir);
    std::ifstream manifest_file(out / "manifest.json");
    const auto manifest = nlohmann::json::parse(manifest_file);
    EXPECT_EQ(deterministic_part(manifest).dump(), deterministic_part(report.manifest).dump());
    for (const auto& [key, name] : manifest["artifacts"].items()) {
        EXPECT_TRUE(fs::exists(out / name.get<std::string>())) << key;
    }
    const auto edges = read_edge_list_file((out / "collapsed_edges.txt").string());
    EXPECT_EQ(edges.num_nodes, 150u);
    std::ifstream features(out / "collapsed_features.csv");
    EXPECT_EQ(read_features_csv(features, "collapsed_features.csv").rows(), 150u);
    std::ifstream labels(out / "collapsed_labels.csv");
    EXPECT_EQ(read_labels_csv(labels, "collapsed_labels.csv").labels.rows(), 150u);
    const auto z = read_sign_binary_file((out / "sign_train.bin").string());
    EXPECT_EQ(z.num_nodes(), 150u);
    EXPECT_EQ(z.hops, cfg.hops);
    std::ifstream model(out / "model.bin", std::ios::binary);
    EXPECT_EQ(load_checkpoint(model).layer_sizes().front(), z.z.cols());

    std::ifstream merge_map(out / "merge_map.csv");
    std::string line;
    std::size_t rows = 0;
    std::getline(merge_map, line);
    EXPECT_EQ(line, "node_id,survivor_id");
    while (std::getline(merge_map, line)) ++rows;
    EXPECT_EQ(rows, report.training_nodes);
    fs::remove_all(dir);
}

TEST(Pipeline, TimeoutSurfacesAsStageError) {
    SbmParams p;
    p.num_nodes = 10000;
    p.p_in = 0.002;
    p.p_out = 0.0002;
    const auto data = generate_sbm(p);
    auto cfg = small_config();
    cfg.zeta = Measure::Closeness;
    cfg.timeout_secs = 0.05;
    try {
        run_pipeline(cfg, data);
        FAIL() << "expected a timeout";
    } catch (const RuntimeError& e) {
        EXPECT_NE(std::string(e.what()).find("centrality"), std::string::npos) << e.what();
        EXPECT_NE(dynamic_cast<const StageError<RuntimeError>*>(&e), nullptr);
    }
}

TEST(Pipeline, BadBudgetIsConfigError) {
    const auto data = small_sbm();
    auto cfg = small_config();
    cfg.psi = 100000;
    EXPECT_THROW(run_pipeline(cfg, data), ConfigError);
    cfg.psi.reset();
    cfg.psi_fraction = 1.5;
    EXPECT_THROW(run_pipeline(cfg, data), ConfigError);
}

TEST(Sweep, EmitsOneRowPerFraction) {
    const auto data = small_sbm();
    auto cfg = small_config();
    cfg.epochs = 10;
    const auto rows = budget_sweep(cfg, data, {0.25, 0.5, 1.0});
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[2].l_err, 0.0);
    std::ostringstream out;
    write_sweep_csv(out, rows);
    std::istringstream in(out.str());
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) ++lines;
    EXPECT_EQ(lines, 4u);
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "fraction,psi,val_accuracy,test_accuracy,l_err");
}

}  // namespace
}  // namespace gck
