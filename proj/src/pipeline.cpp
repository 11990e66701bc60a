#include "gck/pipeline.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>

#include "gck/collapse.hpp"
#include "gck/error.hpp"
#include "gck/log.hpp"
#include "gck/parallel.hpp"
#include "gck/sign.hpp"

namespace gck {

namespace {

using Json = nlohmann::json;

// Runs one stage, recording its wall time and tagging any failure with the
// stage name while keeping the error family.
template <class F>
auto run_stage(const std::string& name, Json& timings, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    auto record = [&] {
        timings[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    try {
        if constexpr (std::is_void_v<decltype(body())>) {
            body();
            record();
        } else {
            auto result = body();
            record();
            return result;
        }
    } catch (const ConfigError& e) {
        throw StageError<ConfigError>(name, e.what());
    } catch (const DataError& e) {
        throw StageError<DataError>(name, e.what());
    } catch (const RuntimeError& e) {
        throw StageError<RuntimeError>(name, e.what());
    } catch (const std::bad_alloc&) {
        throw StageError<RuntimeError>(name, "out of memory");
    }
}

Json metrics_json(const MetricsReport& m) {
    return {{"accuracy", m.accuracy},
            {"micro_f1", m.micro_f1},
            {"micro_sensitivity", m.micro_sensitivity},
            {"micro_specificity", m.micro_specificity},
            {"task_kind", std::string(to_string(m.task_kind))}};
}

std::string optimizer_name(Optimizer o) {
    switch (o) {
        case Optimizer::Sgd: return "sgd";
        case Optimizer::Momentum: return "momentum";
        case Optimizer::Adam: return "adam";
    }
    return "?";
}

Matrix vstack(const Matrix& top, const Matrix& bottom) {
    if (top.cols() != bottom.cols() && top.rows() > 0 && bottom.rows() > 0) {
        throw ShapeError("vstack: column counts differ");
    }
    const auto cols = top.rows() > 0 ? top.cols() : bottom.cols();
    std::vector<double> data(top.data().begin(), top.data().end());
    data.insert(data.end(), bottom.data().begin(), bottom.data().end());
    return Matrix(top.rows() + bottom.rows(), cols, std::move(data));
}

std::size_t resolve_psi(const PipelineConfig& cfg, std::size_t train_nodes) {
    if (cfg.psi) {
        if (*cfg.psi == 0 || *cfg.psi > train_nodes) {
            throw ParameterError("psi " + std::to_string(*cfg.psi) + " must lie in [1, " +
                                 std::to_string(train_nodes) + "]");
        }
        return *cfg.psi;
    }
    if (cfg.psi_fraction) {
        const double f = *cfg.psi_fraction;
        if (!(f > 0.0 && f <= 1.0)) throw ParameterError("psi fraction must lie in (0, 1]");
        const auto psi = static_cast<std::size_t>(std::llround(f * static_cast<double>(train_nodes)));
        return std::clamp<std::size_t>(psi, 1, train_nodes);
    }
    return train_nodes;
}

Json config_json(const PipelineConfig& cfg) {
    Json j;
    j["psi"] = cfg.psi ? Json(*cfg.psi) : Json(nullptr);
    j["psi_fraction"] = cfg.psi_fraction ? Json(*cfg.psi_fraction) : Json(nullptr);
    j["eta"] = cfg.eta;
    j["gamma"] = cfg.gamma;
    j["zeta"] = std::string(to_string(cfg.zeta));
    j["bc_sample_size"] = cfg.bc_sample_size ? Json(*cfg.bc_sample_size) : Json(nullptr);
    j["damping"] = cfg.damping;
    j["tol"] = cfg.tol;
    j["max_iter"] = cfg.max_iter;
    j["hops"] = cfg.hops;
    j["hidden"] = cfg.hidden;
    j["dropout"] = cfg.dropout;
    j["learning_rate"] = cfg.learning_rate;
    j["optimizer"] = optimizer_name(cfg.optimizer);
    j["batches_per_epoch"] = cfg.batches_per_epoch;
    j["epochs"] = cfg.epochs;
    j["quantize"] = cfg.quantize;
    j["bits"] = cfg.bits;
    j["seed"] = cfg.seed;
    return j;
}

std::ofstream open_artifact(const std::filesystem::path& path, bool binary = false) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw DataError("cannot write artifact '" + path.string() + "'");
    out.precision(17);
    return out;
}

}  // namespace

std::size_t peak_rss_bytes() {
    rusage usage{};
    if (getrusage(RUSAGE_SELF, &usage) != 0) return 0;
    return static_cast<std::size_t>(usage.ru_maxrss) * 1024;
}

Json deterministic_part(const Json& manifest) {
    Json out = manifest;
    out.erase("runtime");
    return out;
}

PipelineReport run_pipeline(const PipelineConfig& cfg, const Dataset& data) {
    const auto wall_start = std::chrono::steady_clock::now();
    const Deadline deadline = cfg.timeout_secs ? Deadline::after(std::chrono::duration<double>(*cfg.timeout_secs))
                                               : Deadline();
    Json timings = Json::object();
    PipelineReport report;

    auto train = run_stage("training-subgraph", timings, [&] { return training_subgraph(data.graph, data.attrs); });
    report.training_nodes = train.graph.num_nodes();
    report.psi = run_stage("config", timings, [&] { return resolve_psi(cfg, report.training_nodes); });

    CollapseParams cp;
    cp.psi = report.psi;
    cp.eta = cfg.eta;
    cp.gamma = cfg.gamma;
    cp.zeta = cfg.zeta;
    cp.seed = cfg.seed;
    cp.centrality.sample_size = cfg.bc_sample_size;
    if (cfg.zeta == Measure::Betweenness && !cfg.bc_sample_size && report.training_nodes > 512) {
        cp.centrality.sample_size = 512;
    }
    cp.centrality.seed = cfg.seed;
    cp.centrality.damping = cfg.damping;
    cp.centrality.tol = cfg.tol;
    cp.centrality.max_iter = cfg.max_iter;
    cp.centrality.deadline = deadline;

    auto scores = run_stage("centrality", timings, [&] { return compute_centrality(train.graph, cfg.zeta, cp.centrality); });
    auto clusters = run_stage("cluster", timings, [&] {
        deadline.check("clustering");
        auto c = feature_label_clusters(train.attrs, cp);
        deadline.check("clustering");
        return c;
    });
    auto collapsed = run_stage("collapse", timings, [&] {
        return collapse_with(train.graph, train.attrs, scores, clusters, report.psi);
    });
    report.survivor_count = collapsed.survivor_count;
    report.per_cluster_budget = collapsed.per_cluster_budget;
    report.l_err = label_distribution_error(train.attrs.labels, collapsed.attrs.labels);

    const auto val_nodes = data.attrs.nodes_in(Split::Val);
    const auto test_nodes = data.attrs.nodes_in(Split::Test);
    SignTensor z_train;
    SignTensor z_full;
    run_stage("sign", timings, [&] {
        z_train = sign_features(normalized_adjacency(collapsed.graph), collapsed.attrs.features, cfg.hops);
        z_full = sign_features(normalized_adjacency(data.graph), data.attrs.features, cfg.hops);
        deadline.check("hop aggregation");
    });

    MlpConfig mc;
    mc.layer_sizes.push_back(z_train.z.cols());
    mc.layer_sizes.insert(mc.layer_sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    mc.layer_sizes.push_back(data.attrs.label_dim());
    mc.dropout = cfg.dropout;
    mc.learning_rate = cfg.learning_rate;
    mc.optimizer = cfg.optimizer;
    mc.batches_per_epoch = cfg.batches_per_epoch;
    mc.epochs = cfg.epochs;
    mc.seed = cfg.seed;
    mc.quantize_activations = cfg.quantize;
    mc.quant_bits = cfg.bits;
    mc.task_kind = data.attrs.task_kind;

    std::vector<std::size_t> val_rows_full(val_nodes.begin(), val_nodes.end());
    std::vector<std::size_t> test_rows_full(test_nodes.begin(), test_nodes.end());
    auto trained = run_stage("train", timings, [&] {
        deadline.check("training");
        const Matrix z = vstack(z_train.z, z_full.z.select_rows(val_rows_full));
        const Matrix y = vstack(collapsed.attrs.labels, data.attrs.labels.select_rows(val_rows_full));
        std::vector<std::size_t> train_rows(collapsed.survivor_count);
        std::iota(train_rows.begin(), train_rows.end(), std::size_t{0});
        std::vector<std::size_t> val_rows(val_rows_full.size());
        std::iota(val_rows.begin(), val_rows.end(), collapsed.survivor_count);
        auto result = train_mlp(z, y, train_rows, val_rows, mc);
        deadline.check("training");
        return result;
    });
    report.best_epoch = trained.best_epoch;
    report.best_val_accuracy = trained.best_val_accuracy;

    run_stage("evaluate", timings, [&] {
        if (!val_rows_full.empty()) {
            report.val = evaluate(trained.model, z_full.z, data.attrs.labels, val_rows_full, mc.task_kind);
        }
        if (!test_rows_full.empty()) {
            report.test = evaluate(trained.model, z_full.z, data.attrs.labels, test_rows_full, mc.task_kind);
        }
    });

    Json manifest;
    manifest["config"] = config_json(cfg);
    manifest["dataset"] = {{"nodes", data.graph.num_nodes()},
                           {"edges", data.graph.num_edges()},
                           {"training_nodes", report.training_nodes},
                           {"val_nodes", val_nodes.size()},
                           {"test_nodes", test_nodes.size()},
                           {"feature_dim", data.attrs.feature_dim()},
                           {"label_dim", data.attrs.label_dim()},
                           {"task_kind", std::string(to_string(data.attrs.task_kind))}};
    manifest["collapse"] = {{"psi", report.psi},
                            {"eta", clusters.eta},
                            {"gamma", cfg.gamma},
                            {"zeta", std::string(to_string(cfg.zeta))},
                            {"seed", cfg.seed},
                            {"survivor_count", collapsed.survivor_count},
                            {"collapsed_edges", collapsed.graph.num_edges()},
                            {"per_cluster_budget", collapsed.per_cluster_budget},
                            {"per_cluster_removed", collapsed.per_cluster_removed},
                            {"centrality_converged", collapsed.centrality.converged},
                            {"centrality_iterations", collapsed.centrality.iterations},
                            {"kmeans_inertia", clusters.inertia}};
    manifest["l_err"] = report.l_err;
    manifest["training"] = {{"best_epoch", trained.best_epoch},
                            {"best_val_accuracy", trained.best_val_accuracy},
                            {"epochs_run", trained.history.size()},
                            {"layer_sizes", mc.layer_sizes}};
    manifest["metrics"] = {{"val", val_rows_full.empty() ? Json(nullptr) : metrics_json(report.val)},
                           {"test", test_rows_full.empty() ? Json(nullptr) : metrics_json(report.test)}};

    if (!cfg.out_dir.empty()) {
        run_stage("write-artifacts", timings, [&] {
            namespace fs = std::filesystem;
            const fs::path dir(cfg.out_dir);
            fs::create_directories(dir);
            Json artifacts;
            auto to_full = [&](NodeId training_id) { return train.original_id[training_id]; };
            {
                auto out = open_artifact(dir / "collapsed_edges.txt");
                write_edge_list(out, collapsed.graph);
                artifacts["collapsed_edges"] = "collapsed_edges.txt";
            }
            {
                auto out = open_artifact(dir / "collapsed_features.csv");
                write_features_csv(out, collapsed.attrs.features);
                artifacts["collapsed_features"] = "collapsed_features.csv";
            }
            {
                auto out = open_artifact(dir / "collapsed_labels.csv");
                write_labels_csv(out, collapsed.attrs.labels, collapsed.attrs.task_kind);
                artifacts["collapsed_labels"] = "collapsed_labels.csv";
            }
            {
                auto out = open_artifact(dir / "survivors.csv");
                out << "collapsed_id,node_id\n";
                for (std::size_t i = 0; i < collapsed.survivors.size(); ++i) {
                    out << i << ',' << to_full(collapsed.survivors[i]) << '\n';
                }
                artifacts["survivors"] = "survivors.csv";
            }
            {
                auto out = open_artifact(dir / "merge_map.csv");
                out << "node_id,survivor_id\n";
                for (NodeId v = 0; v < collapsed.merge_map.size(); ++v) {
                    const NodeId s = collapsed.merge_map[v];
                    out << to_full(v) << ',';
                    if (s == MergeMap::kRemoved) out << "removed";
                    else out << to_full(s);
                    out << '\n';
                }
                artifacts["merge_map"] = "merge_map.csv";
            }
            {
                auto out = open_artifact(dir / "centrality.csv");
                CentralityScores mapped = collapsed.centrality;
                for (auto& id : mapped.node_ids) id = to_full(id);
                write_scores_csv(out, mapped);
                artifacts["centrality"] = "centrality.csv";
            }
            {
                auto out = open_artifact(dir / "clusters.csv");
                std::vector<std::uint32_t> ids(train.original_id.begin(), train.original_id.end());
                write_assignment_csv(out, clusters, ids);
                artifacts["clusters"] = "clusters.csv";
            }
            {
                auto out = open_artifact(dir / "sign_train.bin", true);
                write_sign_binary(out, z_train);
                artifacts["sign_train"] = "sign_train.bin";
            }
            {
                auto out = open_artifact(dir / "history.csv");
                write_history_csv(out, trained.history);
                artifacts["history"] = "history.csv";
            }
            {
                auto out = open_artifact(dir / "model.bin", true);
                save_checkpoint(out, trained.model);
                artifacts["model"] = "model.bin";
            }
            artifacts["manifest"] = "manifest.json";
            manifest["artifacts"] = artifacts;
        });
    }

    timings["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    manifest["runtime"] = {{"timings_sec", timings}, {"peak_rss_bytes", peak_rss_bytes()}, {"workers", max_workers()}};
    if (!cfg.out_dir.empty()) {
        auto out = open_artifact(std::filesystem::path(cfg.out_dir) / "manifest.json");
        out << manifest.dump(2) << '\n';
    }
    report.manifest = std::move(manifest);
    return report;
}

PipelineReport run_pipeline(const PipelineConfig& cfg) {
    Json timings;
    const auto data = run_stage("load", timings, [&] { return load_dataset(cfg.paths); });
    return run_pipeline(cfg, data);
}

std::vector<SweepRow> budget_sweep(const PipelineConfig& cfg, const Dataset& data, const std::vector<double>& fractions) {
    std::vector<SweepRow> rows;
    for (double f : fractions) {
        PipelineConfig c = cfg;
        c.psi.reset();
        c.psi_fraction = f;
        c.out_dir.clear();
        const auto report = run_pipeline(c, data);
        rows.push_back({f, report.psi, report.val.accuracy, report.test.accuracy, report.l_err});
        spdlog::info("sweep: fraction {:.3f} psi {} val accuracy {:.4f}", f, report.psi, report.val.accuracy);
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "fraction,psi,val_accuracy,test_accuracy,l_err\n";
    const auto old_precision = out.precision(17);
    for (const auto& r : rows) {
        out << r.fraction << ',' << r.psi << ',' << r.val_accuracy << ',' << r.test_accuracy << ',' << r.l_err << '\n';
    }
    out.precision(old_precision);
}

}  // namespace gck
