// clbr command line: runs one pipeline stage against a config file.
//
//   clbr <stage> --config <path> [--out <dir>] [--seed <u64>] [--threads <n>]
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 numeric failure,
// 5 missing upstream artifact, 1 anything else.

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>

#include "clbr/errors.hpp"
#include "clbr/pipeline.hpp"

namespace {

struct StageOptions {
    std::string config_path;
    std::string out_dir;
    bool out_set = false;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    bool threads_set = false;
};

void add_stage(CLI::App& app, clbr::Stage stage, const char* description,
               std::vector<std::pair<clbr::Stage, std::shared_ptr<StageOptions>>>& registry) {
    auto options = std::make_shared<StageOptions>();
    CLI::App* cmd = app.add_subcommand(clbr::stage_name(stage), description);
    cmd->add_option("--config", options->config_path, "pipeline config file")->required();
    cmd->add_option("--out", options->out_dir, "output directory override")
        ->each([options](const std::string&) { options->out_set = true; });
    cmd->add_option("--seed", options->seed, "master seed override")
        ->each([options](const std::string&) { options->seed_set = true; });
    cmd->add_option("--threads", options->threads, "thread count override")
        ->each([options](const std::string&) { options->threads_set = true; });
    registry.emplace_back(stage, options);
}

int run(clbr::Stage stage, const StageOptions& options) {
    clbr::PipelineConfig cfg = clbr::load_config(options.config_path);
    if (options.out_set) cfg.output_dir = options.out_dir;
    if (options.seed_set) cfg.master_seed = options.seed;
    if (options.threads_set) cfg.threads = options.threads;
    clbr::run_stage(stage, cfg);
    std::cout << clbr::stage_name(stage) << ": done (outputs under " << cfg.output_dir.string()
              << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CLBR: counterfactual graph learning for bundle recommendation"};
    app.require_subcommand(1);

    std::vector<std::pair<clbr::Stage, std::shared_ptr<StageOptions>>> registry;
    add_stage(app, clbr::Stage::Pretrain, "train the selection model on the factual graph",
              registry);
    add_stage(app, clbr::Stage::Augment, "generate and serialize counterfactual views", registry);
    add_stage(app, clbr::Stage::Train, "train the recommender under the counterfactual constraint",
              registry);
    add_stage(app, clbr::Stage::Eval, "compute Recall@k / NDCG@k on the held-out split", registry);
    add_stage(app, clbr::Stage::ExportEmb, "export initial and propagated embeddings as TSV",
              registry);
    add_stage(app, clbr::Stage::SampleComplexity,
              "evaluate the sampler noise sample-complexity bound", registry);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        for (const auto& [stage, options] : registry) {
            if (app.get_subcommand(clbr::stage_name(stage))->parsed()) {
                return run(stage, *options);
            }
        }
        std::cerr << "error: no stage selected\n";
        return 2;
    } catch (const clbr::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const clbr::MissingArtifactError& e) {
        std::cerr << "missing artifact: " << e.what() << '\n';
        return 5;
    } catch (const clbr::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const clbr::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
