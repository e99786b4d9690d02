// Command-line front end: each subcommand drives one slice of the pipeline
// from a config file. Exit 0 on success, 1 with a phase-tagged message on
// stderr otherwise.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "steallab/harness.hpp"

using namespace steallab;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

ExperimentConfig load_config(const std::string& path, int64_t seed, const std::string& out) {
    ExperimentConfig cfg = ExperimentConfig::from_kv(KvMap::parse(read_file(path)));
    if (seed >= 0) {
        cfg.dataset.seed = (uint64_t)seed;
        cfg.target_seed = (uint64_t)seed;
        cfg.steal.seed = (uint64_t)seed;
        cfg.probe_seed = (uint64_t)seed;
        cfg.augment.rng_seed = (uint64_t)seed;
        cfg.target_hyper.augment.rng_seed = (uint64_t)seed;
        cfg.steal.augment.rng_seed = (uint64_t)seed;
    }
    if (!out.empty()) cfg.out_dir = out;
    return cfg;
}

struct SplitData {
    Dataset train, test;
};

SplitData make_splits(const ExperimentConfig& cfg) {
    Dataset full = gen_synthetic(cfg.dataset);
    auto [tr, te] = train_test_split(full, cfg.train_fraction, cfg.dataset.seed);
    return {std::move(tr), std::move(te)};
}

int report_and_exit(const ExperimentReport& rep) {
    if (!rep.ok()) {
        std::cerr << "error [" << rep.error_phase << "]: " << rep.error_message << "\n";
        return 1;
    }
    std::cout << "target_accuracy " << rep.target_eval.accuracy << "\n"
              << "surrogate_agreement " << rep.surrogate_eval.agreement << "\n"
              << "surrogate_accuracy " << rep.surrogate_eval.accuracy << "\n"
              << "queries " << rep.query_count << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"encoder pretraining, stealing attacks, and probe evaluation"};
    app.require_subcommand(1);

    std::string config_path, out_override, checkpoint, target_ckpt, surrogate_ckpt;
    int64_t seed = -1;
    std::vector<std::string> axis_specs;

    auto add_common = [&](CLI::App* sub, bool config_required = true) {
        auto* opt = sub->add_option("--config", config_path, "experiment config file");
        if (config_required) opt->required();
        sub->add_option("--seed", seed, "override every seed in the config");
        sub->add_option("--out", out_override, "override the output directory");
    };

    auto* cmd_pretrain = app.add_subcommand("pretrain", "pretrain the target encoder");
    add_common(cmd_pretrain);
    auto* cmd_steal = app.add_subcommand("steal", "attack a pretrained target checkpoint");
    add_common(cmd_steal);
    auto* cmd_probe = app.add_subcommand("probe", "train and evaluate a linear probe");
    add_common(cmd_probe);
    cmd_probe->add_option("--checkpoint", checkpoint, "encoder checkpoint stem")->required();
    auto* cmd_eval = app.add_subcommand("eval", "compare a surrogate against a target");
    add_common(cmd_eval);
    cmd_eval->add_option("--target", target_ckpt, "target checkpoint stem")->required();
    cmd_eval->add_option("--surrogate", surrogate_ckpt, "surrogate checkpoint stem")->required();
    auto* cmd_run = app.add_subcommand("run", "full pipeline from one config");
    add_common(cmd_run);
    auto* cmd_grid = app.add_subcommand("grid", "config sweep over one or more axes");
    add_common(cmd_grid);
    cmd_grid->add_option("--axis", axis_specs, "sweep axis as key=v1,v2,... (repeatable)");
    auto* cmd_export =
        app.add_subcommand("export-embeddings", "dump encoder embeddings of the test split");
    add_common(cmd_export);
    cmd_export->add_option("--checkpoint", checkpoint, "encoder checkpoint stem")->required();

    CLI11_PARSE(app, argc, argv);

    std::string phase = "config";
    try {
        ExperimentConfig cfg = load_config(config_path, seed, out_override);
        std::filesystem::create_directories(cfg.out_dir);

        if (cmd_run->parsed()) return report_and_exit(run_experiment(cfg));

        if (cmd_grid->parsed()) {
            std::vector<GridAxis> axes;
            for (const auto& spec : axis_specs) {
                auto eq = spec.find('=');
                if (eq == std::string::npos) throw ConfigError("axis needs key=v1,v2,...");
                GridAxis ax{spec.substr(0, eq), {}};
                std::istringstream vs(spec.substr(eq + 1));
                std::string v;
                while (std::getline(vs, v, ',')) ax.values.push_back(v);
                if (ax.values.empty()) throw ConfigError("axis " + ax.key + " has no values");
                axes.push_back(std::move(ax));
            }
            phase = "grid";
            auto reports = run_grid(cfg, axes, cfg.out_dir + "/summary.csv");
            int failed = 0;
            for (const auto& r : reports)
                if (!r.ok()) {
                    ++failed;
                    std::cerr << "cell error [" << r.error_phase << "]: " << r.error_message
                              << "\n";
                }
            std::cout << reports.size() - failed << "/" << reports.size() << " cells ok, summary "
                      << cfg.out_dir << "/summary.csv\n";
            return failed ? 1 : 0;
        }

        if (cmd_pretrain->parsed()) {
            phase = "data";
            SplitData sd = make_splits(cfg);
            phase = "pretrain";
            PretrainHyper hyper = cfg.target_hyper;
            hyper.augment = cfg.augment;
            PretrainResult pr =
                pretrain_encoder(cfg.target_method, sd.train, cfg.target_arch, hyper,
                                 cfg.target_seed);
            phase = "artifacts";
            save_checkpoint(pr.model, cfg.out_dir + "/target", cfg.target_seed);
            detail::write_loss_csv(cfg.out_dir + "/pretrain_loss.csv", pr.epoch_losses);
            std::cout << "checkpoint " << cfg.out_dir << "/target\n";
            if (!pr.epoch_losses.empty())
                std::cout << "final_loss " << pr.epoch_losses.back() << "\n";
            return 0;
        }

        if (cmd_steal->parsed()) {
            if (cfg.target_checkpoint.empty())
                throw ConfigError("steal needs target.checkpoint in the config");
            phase = "load";
            EncoderModel target = load_checkpoint(cfg.target_checkpoint);
            phase = "data";
            SplitData sd = make_splits(cfg);
            SyntheticSpec sspec = cfg.dataset;
            sspec.seed = Rng::mix(cfg.dataset.seed, 0x73757272ULL);
            Dataset surrogate_ds = shifted_variant(sspec, cfg.surrogate_shift);
            if (cfg.surrogate_fraction < 1.0)
                surrogate_ds = subsample(surrogate_ds, cfg.surrogate_fraction, cfg.steal.seed);
            phase = "probe-target";
            std::optional<LinearProbe> probe;
            if (cfg.response_type != ResponseType::Embedding)
                probe = train_probe(target, sd.train, cfg.probe, cfg.probe_seed);
            phase = "attack";
            TargetOracle oracle(target, cfg.response_type, probe, cfg.query_budget);
            StealResult sr = run_attack(oracle, surrogate_ds, cfg.surrogate_arch, cfg.steal);
            phase = "artifacts";
            save_checkpoint(sr.surrogate, cfg.out_dir + "/surrogate", cfg.steal.seed);
            detail::write_loss_csv(cfg.out_dir + "/attack_loss.csv", sr.epoch_losses);
            std::cout << "checkpoint " << cfg.out_dir << "/surrogate\n"
                      << "queries " << oracle.query_count() << "\n"
                      << "budget_exhausted " << (sr.budget_exhausted ? 1 : 0) << "\n";
            return 0;
        }

        if (cmd_probe->parsed()) {
            phase = "load";
            EncoderModel enc = load_checkpoint(checkpoint);
            phase = "data";
            SplitData sd = make_splits(cfg);
            phase = "probe";
            LinearProbe p = train_probe(enc, sd.train, cfg.probe, cfg.probe_seed);
            phase = "eval";
            std::vector<int> preds = predict_labels(probe_logits(p, embed_dataset(enc, sd.test)));
            std::cout << "accuracy " << accuracy(preds, *sd.test.labels) << "\n"
                      << "n_eval " << sd.test.size() << "\n";
            return 0;
        }

        if (cmd_eval->parsed()) {
            phase = "load";
            EncoderModel target = load_checkpoint(target_ckpt);
            EncoderModel surrogate = load_checkpoint(surrogate_ckpt);
            phase = "data";
            SplitData sd = make_splits(cfg);
            phase = "eval";
            LinearProbe tp = train_probe(target, sd.train, cfg.probe, cfg.probe_seed);
            LinearProbe sp = train_probe(surrogate, sd.train, cfg.probe, cfg.probe_seed);
            auto tpred = predict_labels(probe_logits(tp, embed_dataset(target, sd.test)));
            auto spred = predict_labels(probe_logits(sp, embed_dataset(surrogate, sd.test)));
            std::cout << "target_accuracy " << accuracy(tpred, *sd.test.labels) << "\n"
                      << "surrogate_accuracy " << accuracy(spred, *sd.test.labels) << "\n"
                      << "agreement " << agreement(spred, tpred) << "\n";
            return 0;
        }

        if (cmd_export->parsed()) {
            phase = "load";
            EncoderModel enc = load_checkpoint(checkpoint);
            phase = "data";
            SplitData sd = make_splits(cfg);
            phase = "export";
            std::string path = cfg.out_dir + "/embeddings.csv";
            export_embeddings(enc, sd.test, path);
            std::cout << "embeddings " << path << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error [" << phase << "]: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
