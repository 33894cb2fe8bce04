#include "clbr/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "clbr/errors.hpp"
#include "clbr/io.hpp"
#include "clbr/rng.hpp"

namespace clbr {

namespace {

constexpr const char* kToolVersion = "0.1.0";

double get_real(const KeyValueFile& kv, const std::string& key, double fallback) {
    const auto v = kv.get(key);
    if (!v) return fallback;
    try {
        std::size_t used = 0;
        const double parsed = std::stod(*v, &used);
        if (used != v->size()) throw std::invalid_argument(*v);
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + *v + "'");
    }
}

long long get_int(const KeyValueFile& kv, const std::string& key, long long fallback) {
    const auto v = kv.get(key);
    if (!v) return fallback;
    try {
        std::size_t used = 0;
        const long long parsed = std::stoll(*v, &used);
        if (used != v->size()) throw std::invalid_argument(*v);
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + *v + "'");
    }
}

std::uint64_t get_u64(const KeyValueFile& kv, const std::string& key, std::uint64_t fallback) {
    const auto v = kv.get(key);
    if (!v) return fallback;
    try {
        std::size_t used = 0;
        const unsigned long long parsed = std::stoull(*v, &used);
        if (used != v->size()) throw std::invalid_argument(*v);
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected an unsigned integer, got '" + *v +
                          "'");
    }
}

bool get_bool(const KeyValueFile& kv, const std::string& key, bool fallback) {
    const auto v = kv.get(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1") return true;
    if (*v == "false" || *v == "0") return false;
    throw ConfigError("config key '" + key + "': expected true/false, got '" + *v + "'");
}

std::optional<double> get_lambda(const KeyValueFile& kv, const std::string& key) {
    const auto v = kv.get(key);
    if (!v || *v == "auto") return std::nullopt;
    return get_real(kv, key, 0.0);
}

const std::set<std::string> kKnownKeys = {
    "dataset_ub", "dataset_ui", "dataset_bi", "num_users", "num_items", "num_bundles",
    "output_dir", "seed", "threads",
    "train.learning_rate", "train.lr_decay", "train.lr_decay_step", "train.epochs",
    "train.minibatch_size", "train.embedding_dim", "train.layers", "train.pretrain_epochs",
    "train.early_stopping", "train.patience",
    "loss.omega_u", "loss.omega_b", "loss.lambda_u", "loss.lambda_b", "loss.tau",
    "augment.r_ub", "augment.r_ui", "augment.r_bi", "augment.alpha", "augment.alpha_plus",
    "augment.alpha_minus", "augment.num_views", "augment.batch_size", "augment.max_batches",
    "augment.sampler",
    "split.train_fraction", "split.validation_fraction", "split.test_fraction",
    "sample_complexity.epsilon", "sample_complexity.delta", "sample_complexity.eta",
    "sample_complexity.hypothesis_count",
};

std::filesystem::path require_artifact(const PipelineConfig& cfg, const char* name,
                                       const char* upstream) {
    const std::filesystem::path path = cfg.output_dir / name;
    if (!std::filesystem::exists(path)) {
        throw MissingArtifactError("missing '" + path.string() + "': this stage requires " +
                                   std::string(upstream) + " stage output");
    }
    return path;
}

void update_manifest(const PipelineConfig& cfg, Stage stage,
                     const std::vector<std::filesystem::path>& outputs) {
    const std::filesystem::path manifest_path = cfg.output_dir / artifact::kManifest;
    KeyValueFile manifest;
    if (std::filesystem::exists(manifest_path)) manifest = KeyValueFile::load(manifest_path);

    manifest.set("tool_version", kToolVersion);
    manifest.set("master_seed", std::to_string(cfg.master_seed));
    manifest.set(std::string("seeds.") + stage_name(stage),
                 std::to_string(derive_seed(cfg.master_seed, stage_name(stage))));

    KeyValueFile snapshot;
    const std::filesystem::path tmp = cfg.output_dir / ".config_tmp";
    write_config_snapshot(tmp, cfg);
    snapshot = KeyValueFile::load(tmp);
    std::filesystem::remove(tmp);
    for (const auto& [key, value] : snapshot.entries()) manifest.set("config." + key, value);

    for (const auto& in :
         {cfg.dataset_ub, cfg.dataset_ui, cfg.dataset_bi}) {
        if (!in.empty() && std::filesystem::exists(in)) {
            manifest.set("inputs." + in.filename().string(), file_checksum(in));
        }
    }
    for (const auto& out : outputs) {
        manifest.set("checksums." + std::filesystem::relative(out, cfg.output_dir).generic_string(),
                     file_checksum(out));
    }
    manifest.save(manifest_path);
}

NodeId infer_count(NodeId configured, NodeId max_seen, const char* what) {
    if (configured > 0) {
        if (configured <= max_seen) {
            throw DataError(std::string("configured ") + what + " count " +
                            std::to_string(configured) + " is smaller than max id " +
                            std::to_string(max_seen) + " in the edge lists");
        }
        return configured;
    }
    return max_seen + 1;
}

PropagatedEmbeddings load_selection_model(const PipelineConfig& cfg,
                                          const TripartiteGraph& graph) {
    const auto path = require_artifact(cfg, artifact::kSelectionEmbeddings, "pretrain");
    PropagatedEmbeddings model;
    model.values = read_embedding_tsv(path, graph.space());
    model.space = graph.space();
    model.layer_count = cfg.train.layers;
    return model;
}

}  // namespace

void PipelineConfig::validate() const {
    for (const auto& path : {dataset_ub, dataset_ui, dataset_bi}) {
        if (!path.empty() && !std::filesystem::exists(path)) {
            throw ConfigError("dataset path '" + path.string() + "' does not exist");
        }
    }
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (num_users < 0 || num_items < 0 || num_bundles < 0) {
        throw ConfigError("node counts must be non-negative (0 = infer)");
    }
    train.validate();
    split.validate();
    sample_complexity.validate();
}

PipelineConfig load_config(const std::filesystem::path& path) {
    const KeyValueFile kv = KeyValueFile::load(path);
    for (const auto& [key, value] : kv.entries()) {
        if (!kKnownKeys.contains(key)) {
            throw ConfigError("unknown config key '" + key + "' in " + path.string());
        }
    }

    PipelineConfig cfg;
    if (const auto v = kv.get("dataset_ub")) cfg.dataset_ub = *v;
    if (const auto v = kv.get("dataset_ui")) cfg.dataset_ui = *v;
    if (const auto v = kv.get("dataset_bi")) cfg.dataset_bi = *v;
    cfg.num_users = static_cast<NodeId>(get_int(kv, "num_users", 0));
    cfg.num_items = static_cast<NodeId>(get_int(kv, "num_items", 0));
    cfg.num_bundles = static_cast<NodeId>(get_int(kv, "num_bundles", 0));
    if (const auto v = kv.get("output_dir")) cfg.output_dir = *v;
    cfg.master_seed = get_u64(kv, "seed", cfg.master_seed);
    cfg.threads = static_cast<int>(get_int(kv, "threads", cfg.threads));

    TrainConfig& t = cfg.train;
    t.learning_rate = get_real(kv, "train.learning_rate", t.learning_rate);
    t.lr_decay = get_real(kv, "train.lr_decay", t.lr_decay);
    t.lr_decay_step = static_cast<int>(get_int(kv, "train.lr_decay_step", t.lr_decay_step));
    t.epochs = static_cast<int>(get_int(kv, "train.epochs", t.epochs));
    t.minibatch_size = static_cast<int>(get_int(kv, "train.minibatch_size", t.minibatch_size));
    t.embedding_dim = static_cast<int>(get_int(kv, "train.embedding_dim", t.embedding_dim));
    t.layers = static_cast<int>(get_int(kv, "train.layers", t.layers));
    t.pretrain_epochs = static_cast<int>(get_int(kv, "train.pretrain_epochs", t.pretrain_epochs));
    t.early_stopping = get_bool(kv, "train.early_stopping", t.early_stopping);
    t.patience = static_cast<int>(get_int(kv, "train.patience", t.patience));

    LossConfig& l = t.loss;
    l.omega_u = get_real(kv, "loss.omega_u", l.omega_u);
    l.omega_b = get_real(kv, "loss.omega_b", l.omega_b);
    l.lambda_u = get_lambda(kv, "loss.lambda_u");
    l.lambda_b = get_lambda(kv, "loss.lambda_b");
    l.tau = get_real(kv, "loss.tau", l.tau);

    AugmentConfig& a = t.augment;
    a.r_ub = get_real(kv, "augment.r_ub", a.r_ub);
    a.r_ui = get_real(kv, "augment.r_ui", a.r_ui);
    a.r_bi = get_real(kv, "augment.r_bi", a.r_bi);
    a.alpha = get_real(kv, "augment.alpha", a.alpha);
    a.alpha_plus = get_real(kv, "augment.alpha_plus", a.alpha_plus);
    a.alpha_minus = get_real(kv, "augment.alpha_minus", a.alpha_minus);
    a.num_views = static_cast<int>(get_int(kv, "augment.num_views", a.num_views));
    a.batch_size = static_cast<int>(get_int(kv, "augment.batch_size", a.batch_size));
    a.max_batches = static_cast<int>(get_int(kv, "augment.max_batches", a.max_batches));
    if (const auto v = kv.get("augment.sampler")) a.sampler = parse_sampler(*v);

    SplitSpec& s = cfg.split;
    s.train_fraction = get_real(kv, "split.train_fraction", s.train_fraction);
    s.validation_fraction = get_real(kv, "split.validation_fraction", s.validation_fraction);
    s.test_fraction = get_real(kv, "split.test_fraction", s.test_fraction);

    SampleComplexityQuery& q = cfg.sample_complexity;
    q.epsilon = get_real(kv, "sample_complexity.epsilon", q.epsilon);
    q.delta = get_real(kv, "sample_complexity.delta", q.delta);
    q.eta = get_real(kv, "sample_complexity.eta", q.eta);
    q.hypothesis_count = get_real(kv, "sample_complexity.hypothesis_count", q.hypothesis_count);

    cfg.validate();
    return cfg;
}

void write_config_snapshot(const std::filesystem::path& path, const PipelineConfig& cfg) {
    KeyValueFile kv;
    kv.set("dataset_ub", cfg.dataset_ub.generic_string());
    kv.set("dataset_ui", cfg.dataset_ui.generic_string());
    kv.set("dataset_bi", cfg.dataset_bi.generic_string());
    kv.set("num_users", std::to_string(cfg.num_users));
    kv.set("num_items", std::to_string(cfg.num_items));
    kv.set("num_bundles", std::to_string(cfg.num_bundles));
    kv.set("output_dir", cfg.output_dir.generic_string());
    kv.set("seed", std::to_string(cfg.master_seed));
    kv.set("threads", std::to_string(cfg.threads));

    const TrainConfig& t = cfg.train;
    kv.set("train.learning_rate", format_double(t.learning_rate));
    kv.set("train.lr_decay", format_double(t.lr_decay));
    kv.set("train.lr_decay_step", std::to_string(t.lr_decay_step));
    kv.set("train.epochs", std::to_string(t.epochs));
    kv.set("train.minibatch_size", std::to_string(t.minibatch_size));
    kv.set("train.embedding_dim", std::to_string(t.embedding_dim));
    kv.set("train.layers", std::to_string(t.layers));
    kv.set("train.pretrain_epochs", std::to_string(t.pretrain_epochs));
    kv.set("train.early_stopping", t.early_stopping ? "true" : "false");
    kv.set("train.patience", std::to_string(t.patience));

    kv.set("loss.omega_u", format_double(t.loss.omega_u));
    kv.set("loss.omega_b", format_double(t.loss.omega_b));
    kv.set("loss.lambda_u", t.loss.lambda_u ? format_double(*t.loss.lambda_u) : "auto");
    kv.set("loss.lambda_b", t.loss.lambda_b ? format_double(*t.loss.lambda_b) : "auto");
    kv.set("loss.tau", format_double(t.loss.tau));

    kv.set("augment.r_ub", format_double(t.augment.r_ub));
    kv.set("augment.r_ui", format_double(t.augment.r_ui));
    kv.set("augment.r_bi", format_double(t.augment.r_bi));
    kv.set("augment.alpha", format_double(t.augment.alpha));
    kv.set("augment.alpha_plus", format_double(t.augment.alpha_plus));
    kv.set("augment.alpha_minus", format_double(t.augment.alpha_minus));
    kv.set("augment.num_views", std::to_string(t.augment.num_views));
    kv.set("augment.batch_size", std::to_string(t.augment.batch_size));
    kv.set("augment.max_batches", std::to_string(t.augment.max_batches));
    kv.set("augment.sampler", sampler_name(t.augment.sampler));

    kv.set("split.train_fraction", format_double(cfg.split.train_fraction));
    kv.set("split.validation_fraction", format_double(cfg.split.validation_fraction));
    kv.set("split.test_fraction", format_double(cfg.split.test_fraction));

    kv.set("sample_complexity.epsilon", format_double(cfg.sample_complexity.epsilon));
    kv.set("sample_complexity.delta", format_double(cfg.sample_complexity.delta));
    kv.set("sample_complexity.eta", format_double(cfg.sample_complexity.eta));
    kv.set("sample_complexity.hypothesis_count",
           format_double(cfg.sample_complexity.hypothesis_count));
    kv.save(path);
}

const char* stage_name(Stage stage) {
    switch (stage) {
        case Stage::Pretrain: return "pretrain";
        case Stage::Augment: return "augment";
        case Stage::Train: return "train";
        case Stage::Eval: return "eval";
        case Stage::ExportEmb: return "export-emb";
        case Stage::SampleComplexity: return "sample-complexity";
    }
    return "?";
}

Stage parse_stage(const std::string& name) {
    if (name == "pretrain") return Stage::Pretrain;
    if (name == "augment") return Stage::Augment;
    if (name == "train") return Stage::Train;
    if (name == "eval") return Stage::Eval;
    if (name == "export-emb") return Stage::ExportEmb;
    if (name == "sample-complexity") return Stage::SampleComplexity;
    throw ConfigError("unknown stage '" + name + "'");
}

std::filesystem::path view_path(const std::filesystem::path& out_dir, int index) {
    char name[32];
    std::snprintf(name, sizeof(name), "view_%03d.tsv", index);
    return out_dir / artifact::kViewsDir / name;
}

TripartiteGraph load_dataset(const PipelineConfig& cfg) {
    if (cfg.dataset_ub.empty() || cfg.dataset_ui.empty() || cfg.dataset_bi.empty()) {
        throw ConfigError("dataset_ub, dataset_ui and dataset_bi must all be configured");
    }
    const EdgeList ub = read_edge_list(cfg.dataset_ub);
    const EdgeList ui = read_edge_list(cfg.dataset_ui);
    const EdgeList bi = read_edge_list(cfg.dataset_bi);

    NodeId max_user = 0, max_item = 0, max_bundle = 0;
    for (Edge e : ub) {
        max_user = std::max(max_user, e.src);
        max_bundle = std::max(max_bundle, e.dst);
    }
    for (Edge e : ui) {
        max_user = std::max(max_user, e.src);
        max_item = std::max(max_item, e.dst);
    }
    for (Edge e : bi) {
        max_bundle = std::max(max_bundle, e.src);
        max_item = std::max(max_item, e.dst);
    }
    NodeSpace space;
    space.num_users = infer_count(cfg.num_users, max_user, "user");
    space.num_items = infer_count(cfg.num_items, max_item, "item");
    space.num_bundles = infer_count(cfg.num_bundles, max_bundle, "bundle");
    return build_graph(space, ub, ui, bi);
}

SplitResult make_split(const PipelineConfig& cfg, const TripartiteGraph& graph) {
    SplitSpec spec = cfg.split;
    spec.seed = derive_seed(cfg.master_seed, "split");
    return split(graph, spec);
}

namespace {

void run_pretrain(const PipelineConfig& cfg) {
    const TripartiteGraph graph = load_dataset(cfg);
    const SplitResult split_result = make_split(cfg, graph);

    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(cfg.master_seed, "pretrain");
    const PropagatedEmbeddings selection =
        pretrain_selection_model(split_result.train_graph, tc);

    const std::filesystem::path out = cfg.output_dir / artifact::kSelectionEmbeddings;
    write_embedding_tsv(out, selection.values, graph.space());
    update_manifest(cfg, Stage::Pretrain, {out});
}

void run_augment(const PipelineConfig& cfg) {
    const TripartiteGraph graph = load_dataset(cfg);
    const SplitResult split_result = make_split(cfg, graph);

    PropagatedEmbeddings selection;
    const PropagatedEmbeddings* selection_ptr = nullptr;
    if (cfg.train.augment.sampler == SamplerKind::Heuristic) {
        selection = load_selection_model(cfg, split_result.train_graph);
        selection_ptr = &selection;
    }

    const std::uint64_t seed = derive_seed(cfg.master_seed, "augment");
    const std::vector<CounterfactualView> views =
        generate_view_set(split_result.train_graph, selection_ptr, cfg.train.augment, seed);

    std::vector<std::filesystem::path> outputs;
    for (std::size_t i = 0; i < views.size(); ++i) {
        const auto path = view_path(cfg.output_dir, static_cast<int>(i));
        write_view_delta(path, views[i].delta, views[i].seed, cfg.train.augment);
        outputs.push_back(path);
    }
    update_manifest(cfg, Stage::Augment, outputs);
}

void run_train(const PipelineConfig& cfg) {
    const TripartiteGraph graph = load_dataset(cfg);
    const SplitResult split_result = make_split(cfg, graph);

    std::vector<CounterfactualView> views;
    for (int i = 0; i < cfg.train.augment.num_views; ++i) {
        const std::filesystem::path path = view_path(cfg.output_dir, i);
        if (!std::filesystem::exists(path)) {
            throw MissingArtifactError("missing '" + path.string() +
                                       "': this stage requires augment stage output");
        }
        std::uint64_t seed = 0;
        ViewDelta delta = read_view_delta(path, &seed);
        TripartiteGraph view_graph = apply_delta(split_result.train_graph, delta);
        views.push_back(CounterfactualView{std::move(delta), std::move(view_graph), seed});
    }

    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(cfg.master_seed, "train");
    ValidationContext validation{&split_result.validation, 20};
    const TrainedModel model = train(split_result.train_graph, views, tc,
                                     tc.early_stopping ? &validation : nullptr);

    const std::filesystem::path checkpoint = cfg.output_dir / artifact::kCheckpoint;
    const std::filesystem::path log = cfg.output_dir / artifact::kTrainLog;
    const std::filesystem::path snapshot = cfg.output_dir / artifact::kConfigSnapshot;
    write_embedding_tsv(checkpoint, model.params.values, graph.space());
    write_train_log_csv(log, model.history);
    write_config_snapshot(snapshot, cfg);
    update_manifest(cfg, Stage::Train, {checkpoint, log, snapshot});
}

void run_eval(const PipelineConfig& cfg) {
    const TripartiteGraph graph = load_dataset(cfg);
    const SplitResult split_result = make_split(cfg, graph);

    const auto checkpoint = require_artifact(cfg, artifact::kCheckpoint, "train");
    EmbeddingTable params;
    params.values = read_embedding_tsv(checkpoint, graph.space());

    const MetricsReport report = evaluate(params, split_result.train_graph, cfg.train.layers,
                                          split_result.test, {20, 40}, cfg.master_seed);

    const std::filesystem::path csv = cfg.output_dir / artifact::kMetricsCsv;
    const std::filesystem::path summary = cfg.output_dir / artifact::kMetricsSummary;
    write_metrics_csv(csv, report);
    write_metrics_summary(summary, report);
    update_manifest(cfg, Stage::Eval, {csv, summary});
}

void run_export(const PipelineConfig& cfg) {
    const TripartiteGraph graph = load_dataset(cfg);
    const SplitResult split_result = make_split(cfg, graph);

    const auto checkpoint = require_artifact(cfg, artifact::kCheckpoint, "train");
    EmbeddingTable params;
    params.values = read_embedding_tsv(checkpoint, graph.space());

    const PropagatedEmbeddings propagated =
        propagate(params, normalized_adjacency(split_result.train_graph), graph.space(),
                  cfg.train.layers);

    const std::filesystem::path initial = cfg.output_dir / "export" / "initial.tsv";
    const std::filesystem::path prop = cfg.output_dir / "export" / "propagated.tsv";
    write_embedding_tsv(initial, params.values, graph.space());
    write_embedding_tsv(prop, propagated.values, graph.space());
    update_manifest(cfg, Stage::ExportEmb, {initial, prop});
}

void run_sample_complexity(const PipelineConfig& cfg) {
    const double bound = sample_complexity_bound(cfg.sample_complexity);
    const std::int64_t samples = sample_complexity(cfg.sample_complexity);

    KeyValueFile kv;
    kv.set("epsilon", format_double(cfg.sample_complexity.epsilon));
    kv.set("delta", format_double(cfg.sample_complexity.delta));
    kv.set("eta", format_double(cfg.sample_complexity.eta));
    kv.set("hypothesis_count", format_double(cfg.sample_complexity.hypothesis_count));
    kv.set("bound", format_double(bound));
    kv.set("samples", std::to_string(samples));
    const std::filesystem::path out = cfg.output_dir / artifact::kSampleComplexity;
    kv.save(out);
    update_manifest(cfg, Stage::SampleComplexity, {out});
}

}  // namespace

void run_stage(Stage stage, const PipelineConfig& cfg) {
    cfg.validate();
    std::filesystem::create_directories(cfg.output_dir);
    switch (stage) {
        case Stage::Pretrain: run_pretrain(cfg); return;
        case Stage::Augment: run_augment(cfg); return;
        case Stage::Train: run_train(cfg); return;
        case Stage::Eval: run_eval(cfg); return;
        case Stage::ExportEmb: run_export(cfg); return;
        case Stage::SampleComplexity: run_sample_complexity(cfg); return;
    }
    throw ConfigError("unhandled stage");
}

}  // namespace clbr
