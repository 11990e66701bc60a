#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "gck/collapse.hpp"
#include "gck/dataset.hpp"
#include "gck/error.hpp"
#include "gck/log.hpp"
#include "gck/metrics.hpp"
#include "gck/parallel.hpp"
#include "gck/pipeline.hpp"
#include "gck/sign.hpp"

namespace {

using namespace gck;

enum ExitCode { kOk = 0, kConfig = 2, kData = 3, kRuntime = 4 };

struct Options {
    DatasetPaths paths;
    std::optional<std::size_t> psi;
    std::optional<double> psi_fraction;
    std::size_t eta = 100;
    double gamma = 0.5;
    std::string zeta = "ec";
    std::optional<std::size_t> bc_samples;
    std::size_t hops = 2;
    unsigned bits = 2;
    std::uint64_t seed = 0;
    int workers = 0;
    std::string out;
    std::optional<double> timeout_secs;
    // train / pipeline
    std::vector<std::size_t> hidden = {64};
    std::size_t epochs = 100;
    double lr = 0.01;
    double dropout = 0.2;
    std::string optimizer = "adam";
    std::size_t batches = 4;
    bool no_quantize = false;
    // subcommand specific
    bool agnostic = false;
    bool csv = false;
    std::string sign_path;
    std::string collapsed_labels;
    std::vector<double> fractions = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    SbmParams sbm;
    std::string stem = "sbm";
};

Optimizer parse_optimizer(const std::string& s) {
    if (s == "sgd") return Optimizer::Sgd;
    if (s == "momentum") return Optimizer::Momentum;
    if (s == "adam") return Optimizer::Adam;
    throw ParameterError("unknown optimizer '" + s + "' (sgd, momentum, adam)");
}

// Writes to the named file, or stdout when the name is empty or "-".
class Output {
public:
    explicit Output(const std::string& path, bool binary = false) {
        if (path.empty() || path == "-") return;
        if (const auto parent = std::filesystem::path(path).parent_path(); !parent.empty()) {
            std::filesystem::create_directories(parent);
        }
        file_ = std::make_unique<std::ofstream>(path, binary ? std::ios::binary : std::ios::out);
        if (!*file_) throw DataError("cannot open '" + path + "' for writing");
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

std::ifstream open_input(const std::string& path) {
    if (path.empty()) throw ParameterError("missing input path");
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return in;
}

Graph load_graph(const std::string& path) {
    const auto list = read_edge_list_file(path);
    return Graph::from_edges(list.edges, list.num_nodes);
}

AttributeSet load_features_labels(const Options& o) {
    auto fin = open_input(o.paths.features);
    auto lin = open_input(o.paths.labels);
    AttributeSet attrs;
    attrs.features = read_features_csv(fin, o.paths.features);
    auto table = read_labels_csv(lin, o.paths.labels);
    attrs.labels = std::move(table.labels);
    attrs.task_kind = table.task_kind;
    attrs.split.assign(attrs.features.rows(), Split::None);
    attrs.validate();
    return attrs;
}

CentralityParams centrality_params(const Options& o, std::size_t n, const Deadline& deadline) {
    auto p = CentralityParams::defaults_for(n);
    if (o.bc_samples) p.sample_size = o.bc_samples;
    p.seed = o.seed;
    p.deadline = deadline;
    return p;
}

Deadline deadline_of(const Options& o) {
    return o.timeout_secs ? Deadline::after(std::chrono::duration<double>(*o.timeout_secs)) : Deadline();
}

PipelineConfig pipeline_config(const Options& o) {
    PipelineConfig c;
    c.paths = o.paths;
    c.psi = o.psi;
    c.psi_fraction = o.psi_fraction;
    c.eta = o.eta;
    c.gamma = o.gamma;
    c.zeta = measure_from_string(o.zeta);
    c.bc_sample_size = o.bc_samples;
    c.hops = o.hops;
    c.hidden = o.hidden;
    c.dropout = o.dropout;
    c.learning_rate = o.lr;
    c.optimizer = parse_optimizer(o.optimizer);
    c.batches_per_epoch = o.batches;
    c.epochs = o.epochs;
    c.quantize = !o.no_quantize;
    c.bits = o.bits;
    c.seed = o.seed;
    c.out_dir = o.out;
    c.timeout_secs = o.timeout_secs;
    return c;
}

int cmd_centrality(const Options& o) {
    const auto g = load_graph(o.paths.edges);
    const auto scores = compute_centrality(g, measure_from_string(o.zeta),
                                           centrality_params(o, g.num_nodes(), deadline_of(o)));
    Output out(o.out);
    write_scores_csv(out.stream(), scores);
    return kOk;
}

int cmd_cluster(const Options& o) {
    const auto attrs = load_features_labels(o);
    CollapseParams p;
    p.eta = o.eta;
    p.gamma = o.gamma;
    p.seed = o.seed;
    const auto clusters = feature_label_clusters(attrs, p);
    std::vector<std::uint32_t> ids(attrs.num_nodes());
    std::iota(ids.begin(), ids.end(), 0u);
    Output out(o.out);
    write_assignment_csv(out.stream(), clusters, ids);
    return kOk;
}

int cmd_collapse(const Options& o) {
    if (o.out.empty()) throw ParameterError("collapse needs --out <dir>");
    const auto data = load_dataset(o.paths);
    const auto train = training_subgraph(data.graph, data.attrs);
    const auto n = train.graph.num_nodes();
    std::size_t psi = n;
    if (o.psi) psi = *o.psi;
    else if (o.psi_fraction) psi = static_cast<std::size_t>(std::llround(*o.psi_fraction * static_cast<double>(n)));

    CollapseParams p;
    p.psi = psi;
    p.eta = o.agnostic ? 1 : o.eta;
    p.gamma = o.gamma;
    p.zeta = measure_from_string(o.zeta);
    p.seed = o.seed;
    p.centrality = centrality_params(o, n, deadline_of(o));
    const auto result = falcon_collapse(train.graph, train.attrs, p);

    std::filesystem::create_directories(o.out);
    Dataset collapsed{result.graph, result.attrs};
    save_dataset(dataset_paths_in(o.out, "collapsed"), collapsed);
    std::ofstream mm(std::filesystem::path(o.out) / "merge_map.csv");
    mm << "node_id,survivor_id\n";
    for (NodeId v = 0; v < result.merge_map.size(); ++v) {
        mm << train.original_id[v] << ',';
        const NodeId s = result.merge_map[v];
        if (s == MergeMap::kRemoved) mm << "removed";
        else mm << train.original_id[s];
        mm << '\n';
    }
    std::cout << "training nodes " << n << ", survivors " << result.survivor_count << ", l_err "
              << label_distribution_error(train.attrs.labels, result.attrs.labels) << '\n';
    return kOk;
}

int cmd_sign(const Options& o) {
    const auto g = load_graph(o.paths.edges);
    auto fin = open_input(o.paths.features);
    const auto x = read_features_csv(fin, o.paths.features);
    const auto z = sign_features(normalized_adjacency(g), x, o.hops);
    if (o.csv) {
        Output out(o.out);
        write_sign_csv(out.stream(), z);
    } else {
        if (o.out.empty() || o.out == "-") throw ParameterError("binary hop tensor needs --out <file> (or use --csv)");
        write_sign_binary_file(o.out, z);
    }
    return kOk;
}

int cmd_train(const Options& o) {
    if (o.sign_path.empty()) throw ParameterError("train needs --sign <hop tensor file>");
    const auto z = read_sign_binary_file(o.sign_path);
    auto lin = open_input(o.paths.labels);
    const auto labels = read_labels_csv(lin, o.paths.labels);
    if (labels.labels.rows() != z.num_nodes()) {
        throw ShapeError("labels have " + std::to_string(labels.labels.rows()) + " rows, hop tensor has " +
                         std::to_string(z.num_nodes()));
    }
    auto min = open_input(o.paths.masks);
    const auto split = read_masks_csv(min, z.num_nodes(), o.paths.masks);
    std::vector<std::size_t> train_rows, val_rows, test_rows;
    for (std::size_t i = 0; i < split.size(); ++i) {
        if (split[i] == Split::Train) train_rows.push_back(i);
        else if (split[i] == Split::Val) val_rows.push_back(i);
        else if (split[i] == Split::Test) test_rows.push_back(i);
    }
    MlpConfig mc;
    mc.layer_sizes.push_back(z.z.cols());
    mc.layer_sizes.insert(mc.layer_sizes.end(), o.hidden.begin(), o.hidden.end());
    mc.layer_sizes.push_back(labels.labels.cols());
    mc.dropout = o.dropout;
    mc.learning_rate = o.lr;
    mc.optimizer = parse_optimizer(o.optimizer);
    mc.batches_per_epoch = o.batches;
    mc.epochs = o.epochs;
    mc.seed = o.seed;
    mc.quantize_activations = !o.no_quantize;
    mc.quant_bits = o.bits;
    mc.task_kind = labels.task_kind;
    const auto result = train_mlp(z.z, labels.labels, train_rows, val_rows, mc);

    nlohmann::json report{{"best_epoch", result.best_epoch}, {"best_val_accuracy", result.best_val_accuracy}};
    if (!test_rows.empty()) {
        const auto m = evaluate(result.model, z.z, labels.labels, test_rows, mc.task_kind);
        report["test"] = {{"accuracy", m.accuracy},
                          {"micro_f1", m.micro_f1},
                          {"micro_sensitivity", m.micro_sensitivity},
                          {"micro_specificity", m.micro_specificity}};
    }
    if (!o.out.empty()) {
        const std::filesystem::path dir(o.out);
        std::filesystem::create_directories(dir);
        std::ofstream model(dir / "model.bin", std::ios::binary);
        save_checkpoint(model, result.model);
        std::ofstream history(dir / "history.csv");
        write_history_csv(history, result.history);
        std::ofstream(dir / "train_report.json") << report.dump(2) << '\n';
    }
    std::cout << report.dump(2) << '\n';
    return kOk;
}

int cmd_pipeline(const Options& o) {
    const auto report = run_pipeline(pipeline_config(o));
    std::cout << report.manifest.dump(2) << '\n';
    return kOk;
}

int cmd_lerr(const Options& o) {
    auto a = open_input(o.paths.labels);
    auto b = open_input(o.collapsed_labels);
    auto original = read_labels_csv(a, o.paths.labels);
    auto collapsed = read_labels_csv(b, o.collapsed_labels);
    // Class-index files only know the classes they mention, so widen the
    // narrower one; both index the same class space.
    if (original.task_kind == TaskKind::MultiClass && collapsed.task_kind == TaskKind::MultiClass) {
        const auto width = std::max(original.labels.cols(), collapsed.labels.cols());
        for (auto* t : {&original, &collapsed}) {
            if (t->labels.cols() == width) continue;
            Matrix wide(t->labels.rows(), width);
            for (std::size_t i = 0; i < wide.rows(); ++i) {
                for (std::size_t j = 0; j < t->labels.cols(); ++j) wide(i, j) = t->labels(i, j);
            }
            t->labels = std::move(wide);
        }
    }
    std::printf("%.17g\n", label_distribution_error(original.labels, collapsed.labels));
    return kOk;
}

int cmd_sweep(const Options& o) {
    auto cfg = pipeline_config(o);
    cfg.out_dir.clear();
    const auto data = load_dataset(cfg.paths);
    const auto rows = budget_sweep(cfg, data, o.fractions);
    Output out(o.out);
    write_sweep_csv(out.stream(), rows);
    return kOk;
}

int cmd_sbm(const Options& o) {
    if (o.out.empty()) throw ParameterError("sbm needs --out <dir>");
    SbmParams p = o.sbm;
    p.seed = o.seed;
    const auto data = generate_sbm(p);
    std::filesystem::create_directories(o.out);
    save_dataset(dataset_paths_in(o.out, o.stem), data);
    return kOk;
}

void add_dataset_flags(CLI::App* app, Options& o, bool edges, bool features, bool labels, bool masks) {
    if (edges) app->add_option("--edges", o.paths.edges, "Edge list (one 'u v' pair per line)")->required();
    if (features) app->add_option("--features", o.paths.features, "Features CSV")->required();
    if (labels) app->add_option("--labels", o.paths.labels, "Labels CSV")->required();
    if (masks) app->add_option("--masks", o.paths.masks, "Split CSV (node_id,split)")->required();
}

void add_collapse_flags(CLI::App* app, Options& o) {
    auto* psi = app->add_option("--psi", o.psi, "Surviving training-node budget");
    app->add_option("--psi-frac", o.psi_fraction, "Budget as a fraction of training nodes")
        ->check(CLI::Range(0.0, 1.0))
        ->excludes(psi);
    app->add_option("--eta", o.eta, "Number of feature-label clusters")->capture_default_str();
    app->add_option("--gamma", o.gamma, "Feature vs label weight in [0, 1]")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    app->add_option("--zeta", o.zeta, "Centrality measure")
        ->check(CLI::IsMember({"dc", "bc", "cc", "pr", "ec"}, CLI::ignore_case))
        ->capture_default_str();
    app->add_option("--bc-samples", o.bc_samples, "Betweenness source sample size");
}

void add_training_flags(CLI::App* app, Options& o) {
    app->add_option("--bits", o.bits, "Activation quantization bits")->check(CLI::Range(1, 8))->capture_default_str();
    app->add_flag("--no-quantize", o.no_quantize, "Train without activation quantization");
    app->add_option("--hidden", o.hidden, "Hidden layer widths")->capture_default_str();
    app->add_option("--epochs", o.epochs, "Training epochs")->capture_default_str();
    app->add_option("--lr", o.lr, "Learning rate")->capture_default_str();
    app->add_option("--dropout", o.dropout, "Dropout rate")->capture_default_str();
    app->add_option("--optimizer", o.optimizer, "sgd, momentum or adam")->capture_default_str();
    app->add_option("--batches", o.batches, "Mini-batches per epoch")->capture_default_str();
}

int dispatch(int argc, char** argv) {
    Options o;
    CLI::App app{"Graph collapse, hop-feature precomputation and quantized MLP training"};
    app.require_subcommand(1);
    app.add_option("--seed", o.seed, "Random seed")->capture_default_str();
    app.add_option("--workers", o.workers, "OpenMP worker count (0: runtime default)")->capture_default_str();
    app.add_option("--timeout-secs", o.timeout_secs, "Wall-clock limit for long-running stages");
    app.add_option("--out", o.out, "Output file or directory");

    auto* centrality = app.add_subcommand("centrality", "Score every node of a graph");
    add_dataset_flags(centrality, o, true, false, false, false);
    centrality->add_option("--zeta", o.zeta, "Centrality measure")
        ->check(CLI::IsMember({"dc", "bc", "cc", "pr", "ec"}, CLI::ignore_case))
        ->capture_default_str();
    centrality->add_option("--bc-samples", o.bc_samples, "Betweenness source sample size");

    auto* cluster = app.add_subcommand("cluster", "K-means over normalized features and labels");
    add_dataset_flags(cluster, o, false, true, true, false);
    cluster->add_option("--eta", o.eta, "Number of clusters")->capture_default_str();
    cluster->add_option("--gamma", o.gamma, "Feature vs label weight in [0, 1]")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();

    auto* collapse = app.add_subcommand("collapse", "Collapse the training subgraph to a node budget");
    add_dataset_flags(collapse, o, true, true, true, true);
    add_collapse_flags(collapse, o);
    collapse->add_flag("--agnostic", o.agnostic, "Ignore features and labels (single cluster)");

    auto* sign = app.add_subcommand("sign", "Precompute hop-aggregated features");
    add_dataset_flags(sign, o, true, true, false, false);
    sign->add_option("--hops", o.hops, "Aggregation hops")->capture_default_str();
    sign->add_flag("--csv", o.csv, "Write CSV instead of the binary format");

    auto* train = app.add_subcommand("train", "Train an MLP on a precomputed hop tensor");
    train->add_option("--sign", o.sign_path, "Hop tensor written by 'sign'")->required();
    add_dataset_flags(train, o, false, false, true, true);
    add_training_flags(train, o);

    auto* pipeline = app.add_subcommand("pipeline", "Collapse, precompute, train and evaluate");
    add_dataset_flags(pipeline, o, true, true, true, true);
    add_collapse_flags(pipeline, o);
    pipeline->add_option("--hops", o.hops, "Aggregation hops")->capture_default_str();
    add_training_flags(pipeline, o);

    auto* lerr = app.add_subcommand("lerr", "Label distribution error between two label files");
    add_dataset_flags(lerr, o, false, false, true, false);
    lerr->add_option("--collapsed-labels", o.collapsed_labels, "Labels after collapse")->required();

    auto* sweep = app.add_subcommand("sweep", "Validation accuracy across node budgets (CSV)");
    add_dataset_flags(sweep, o, true, true, true, true);
    add_collapse_flags(sweep, o);
    sweep->add_option("--hops", o.hops, "Aggregation hops")->capture_default_str();
    add_training_flags(sweep, o);
    sweep->add_option("--fractions", o.fractions, "Budget fractions of the training nodes")
        ->capture_default_str();

    auto* sbm = app.add_subcommand("sbm", "Write a planted-partition fixture dataset");
    sbm->add_option("--nodes", o.sbm.num_nodes, "Node count")->capture_default_str();
    sbm->add_option("--blocks", o.sbm.num_blocks, "Blocks (one label each)")->capture_default_str();
    sbm->add_option("--p-in", o.sbm.p_in, "Within-block edge probability")->capture_default_str();
    sbm->add_option("--p-out", o.sbm.p_out, "Between-block edge probability")->capture_default_str();
    sbm->add_option("--weak-block", o.sbm.weak_block, "Block with thinned edges (-1: none)")->capture_default_str();
    sbm->add_option("--feature-dim", o.sbm.feature_dim, "Feature width")->capture_default_str();
    sbm->add_option("--stem", o.stem, "File name prefix")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    init_logging();
    set_workers(o.workers);
    if (*centrality) return cmd_centrality(o);
    if (*cluster) return cmd_cluster(o);
    if (*collapse) return cmd_collapse(o);
    if (*sign) return cmd_sign(o);
    if (*train) return cmd_train(o);
    if (*pipeline) return cmd_pipeline(o);
    if (*lerr) return cmd_lerr(o);
    if (*sbm) return cmd_sbm(o);
    return cmd_sweep(o);
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const gck::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const gck::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const gck::RuntimeError& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return kRuntime;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return kRuntime;
    }
}
