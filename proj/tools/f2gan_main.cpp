#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "f2gan/pipeline.hpp"
#include "f2gan/types.hpp"

namespace {

struct CliOptions {
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    std::string profile;
    double threshold = 0.5;
    long epochs = 0;
    std::string variant;
    std::string models;
};

enum : unsigned {
    kProfile = 1u << 0,
    kThreshold = 1u << 1,
    kEpochs = 1u << 2,
    kVariant = 1u << 3,
    kModels = 1u << 4,
};

void add_options(CLI::App* cmd, CliOptions& o, unsigned extras) {
    cmd->add_option("--config", o.config, "Experiment config JSON")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "Root seed (overrides the config)");
    cmd->add_option("--out", o.out, "Output directory (overrides the config)");
    if (extras & kProfile)
        cmd->add_option("--profile", o.profile, "Scale preset")
            ->check(CLI::IsMember({"paper", "desk"}));
    if (extras & kThreshold)
        cmd->add_option("--threshold", o.threshold, "Detection verdict threshold");
    if (extras & kEpochs)
        cmd->add_option("--epochs", o.epochs, "GAN training epochs (overrides the profile)");
    if (extras & kVariant)
        cmd->add_option("--variant", o.variant, "GAN variant (default: both)")
            ->check(CLI::IsMember({"cgan", "f2gan"}));
    if (extras & kModels)
        cmd->add_option("--models", o.models, "Load Stage-2 models from this directory");
}

bool flag_given(const CLI::App* cmd, const std::string& name) {
    const CLI::Option* opt = cmd->get_option_no_throw(name);
    return opt && opt->count() > 0;
}

f2gan::ExperimentConfig make_config(const CLI::App* cmd, const CliOptions& o) {
    f2gan::ExperimentConfig config;
    if (flag_given(cmd, "--config")) config = f2gan::load_experiment_config(o.config);
    if (flag_given(cmd, "--profile"))
        f2gan::apply_profile(config, f2gan::profile_from_string(o.profile));
    if (flag_given(cmd, "--seed")) config.seed = o.seed;
    if (flag_given(cmd, "--out")) config.out_dir = o.out;
    if (flag_given(cmd, "--threshold")) config.threshold = o.threshold;
    if (flag_given(cmd, "--epochs")) config.train.epochs = o.epochs;
    config.validate();
    return config;
}

void run_variants(const CLI::App* cmd, const std::string& chosen,
                  const f2gan::ExperimentConfig& config,
                  void (*stage)(const f2gan::ExperimentConfig&, f2gan::GanVariantKind)) {
    if (!flag_given(cmd, "--variant") || chosen == "cgan")
        stage(config, f2gan::GanVariantKind::Conventional);
    if (!flag_given(cmd, "--variant") || chosen == "f2gan")
        stage(config, f2gan::GanVariantKind::FeatureFeedback);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-stage microgrid diagnosis: GAN-based anomaly detection that separates\n"
                 "inverter faults from false-data-injection attacks, then switch-fault\n"
                 "classification with KNN / decision tree / SVM / ANN."};
    app.require_subcommand(1);
    CliOptions o;

    CLI::App* gen = app.add_subcommand(
        "gen-data", "Synthesize the dataset, split, FDI set, and detection test set");
    add_options(gen, o, 0);
    CLI::App* train =
        app.add_subcommand("train", "Train a GAN variant on the training split");
    add_options(train, o, kProfile | kEpochs | kVariant);
    CLI::App* detect =
        app.add_subcommand("detect", "Score the detection test set with a trained variant");
    add_options(detect, o, kThreshold | kVariant);
    CLI::App* classify =
        app.add_subcommand("classify", "Classify the fault-verdict samples (Stage 2)");
    add_options(classify, o, kModels);
    CLI::App* evaluate =
        app.add_subcommand("evaluate", "Evaluate detection and classification results");
    add_options(evaluate, o, kThreshold);
    CLI::App* repro = app.add_subcommand(
        "repro", "Run the whole pipeline under one seed: gen-data through evaluate");
    add_options(repro, o, kProfile | kThreshold | kEpochs);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const CLI::App* cmd = app.get_subcommands().front();
    try {
        f2gan::ExperimentConfig config = make_config(cmd, o);
        if (cmd == gen) {
            f2gan::cmd_gen_data(config);
        } else if (cmd == train) {
            run_variants(cmd, o.variant, config, f2gan::cmd_train);
        } else if (cmd == detect) {
            run_variants(cmd, o.variant, config, f2gan::cmd_detect);
        } else if (cmd == classify) {
            f2gan::cmd_classify(config, o.models);
        } else if (cmd == evaluate) {
            f2gan::cmd_evaluate(config);
        } else if (cmd == repro) {
            f2gan::cmd_repro(config);
        }
        return 0;
    } catch (const f2gan::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
