#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "steallab/checkpoint.hpp"
#include "steallab/config.hpp"
#include "steallab/eval.hpp"
#include "steallab/oracle.hpp"
#include "steallab/steal.hpp"

namespace steallab {

struct ExperimentReport {
    uint64_t config_hash = 0;
    std::string error_phase;  // empty on success
    std::string error_message;
    double pretrain_seconds = 0.0;
    double attack_seconds = 0.0;
    double eval_seconds = 0.0;
    int64_t query_count = 0;
    bool budget_exhausted = false;
    std::vector<double> pretrain_losses;
    std::vector<double> attack_losses;
    EvalResult target_eval;     // target classifier vs itself / labels
    EvalResult surrogate_eval;  // agreement vs target, accuracy vs labels
    double gap = 0.0;           // |accuracy - agreement| of the surrogate

    bool ok() const { return error_phase.empty(); }
};

namespace detail {

inline void write_loss_csv(const std::string& path, const std::vector<double>& losses) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    f << "epoch,loss\n";
    char buf[48];
    for (size_t i = 0; i < losses.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.12g", losses[i]);
        f << i << "," << buf << "\n";
    }
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

}  // namespace detail

inline void write_metrics_csv(const std::string& path, const std::vector<std::string>& rows,
                              bool with_header = true) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    if (with_header) f << "run_id,attack,response_type,surrogate_ds,agreement,accuracy,queries,seed\n";
    for (const auto& r : rows) f << r << "\n";
}

inline std::string metrics_row(const std::string& run_id, const ExperimentConfig& cfg,
                               const ExperimentReport& rep) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s,%s,%s,%s,%.6f,%.6f,%lld,%llu", run_id.c_str(),
                  attack_name(cfg.steal.attack).c_str(),
                  response_type_name(cfg.response_type).c_str(),
                  ExperimentConfig::shift_name(cfg.surrogate_shift).c_str(), rep.surrogate_eval.agreement,
                  rep.surrogate_eval.accuracy, (long long)rep.query_count,
                  (unsigned long long)cfg.steal.seed);
    return buf;
}

// End-to-end pipeline: pretrain (or load) the target, expose it as an oracle,
// run the configured attack, train probes for both encoders on the target's
// pretraining data, evaluate on the held-out split. Fully determined by the
// config; artifacts land under cfg.out_dir when write_artifacts is true.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg, bool write_artifacts = true) {
    ExperimentReport rep;
    rep.config_hash = cfg.hash();
    std::string phase = "setup";
    try {
        namespace fs = std::filesystem;
        if (write_artifacts) fs::create_directories(cfg.out_dir);

        Dataset full = gen_synthetic(cfg.dataset);
        auto [train_ds, test_ds] = train_test_split(full, cfg.train_fraction, cfg.dataset.seed);

        // target
        phase = "pretrain";
        detail::Timer t_pre;
        EncoderModel target;
        if (!cfg.target_checkpoint.empty()) {
            target = load_checkpoint(cfg.target_checkpoint);
        } else {
            PretrainHyper hyper = cfg.target_hyper;
            hyper.augment = cfg.augment;
            PretrainResult pr = pretrain_encoder(cfg.target_method, train_ds, cfg.target_arch, hyper,
                                                 cfg.target_seed);
            target = std::move(pr.model);
            rep.pretrain_losses = std::move(pr.epoch_losses);
        }
        rep.pretrain_seconds = t_pre.seconds();

        phase = "probe-target";
        LinearProbe target_probe = train_probe(target, train_ds, cfg.probe, cfg.probe_seed);

        // attack
        phase = "attack";
        detail::Timer t_att;
        SyntheticSpec surrogate_spec = cfg.dataset;
        surrogate_spec.seed = Rng::mix(cfg.dataset.seed, 0x73757272ULL);
        Dataset surrogate_ds = shifted_variant(surrogate_spec, cfg.surrogate_shift);
        if (cfg.surrogate_fraction < 1.0)
            surrogate_ds = subsample(surrogate_ds, cfg.surrogate_fraction, cfg.steal.seed);

        TargetOracle oracle(target, cfg.response_type,
                            cfg.response_type == ResponseType::Embedding
                                ? std::nullopt
                                : std::optional<LinearProbe>(target_probe),
                            cfg.query_budget);
        StealResult attack = run_attack(oracle, surrogate_ds, cfg.surrogate_arch, cfg.steal);
        rep.attack_seconds = t_att.seconds();
        rep.attack_losses = attack.epoch_losses;
        rep.query_count = oracle.query_count();
        rep.budget_exhausted = attack.budget_exhausted;

        // evaluation
        phase = "eval";
        detail::Timer t_eval;
        Tensor target_test_emb = embed_dataset(target, test_ds);
        std::vector<int> target_preds = predict_labels(probe_logits(target_probe, target_test_emb));

        std::vector<int> surrogate_preds;
        if (cfg.steal.attack == Attack::ConvClassifier) {
            // the stolen classifier is the surrogate model end to end
            Tensor emb = embed_dataset(attack.surrogate, test_ds);
            surrogate_preds = predict_labels(probe_logits(*attack.head, emb));
        } else {
            LinearProbe sp = train_probe(attack.surrogate, train_ds, cfg.probe, cfg.probe_seed);
            Tensor emb = embed_dataset(attack.surrogate, test_ds);
            surrogate_preds = predict_labels(probe_logits(sp, emb));
        }
        rep.eval_seconds = t_eval.seconds();

        rep.target_eval.agreement = 1.0;
        rep.target_eval.accuracy = accuracy(target_preds, *test_ds.labels);
        rep.target_eval.n_eval = test_ds.size();
        rep.surrogate_eval.agreement = agreement(surrogate_preds, target_preds);
        rep.surrogate_eval.accuracy = accuracy(surrogate_preds, *test_ds.labels);
        rep.surrogate_eval.n_eval = test_ds.size();
        rep.gap = std::abs(rep.surrogate_eval.accuracy - rep.surrogate_eval.agreement);

        if (write_artifacts) {
            phase = "artifacts";
            save_checkpoint(target, cfg.out_dir + "/target", cfg.target_seed);
            save_checkpoint(attack.surrogate, cfg.out_dir + "/surrogate", cfg.steal.seed);
            detail::write_loss_csv(cfg.out_dir + "/pretrain_loss.csv", rep.pretrain_losses);
            detail::write_loss_csv(cfg.out_dir + "/attack_loss.csv", rep.attack_losses);
            write_metrics_csv(cfg.out_dir + "/metrics.csv", {metrics_row("run0", cfg, rep)});
            std::ofstream rf(cfg.out_dir + "/report.txt");
            rf << "config_hash " << rep.config_hash << "\n"
               << "query_count " << rep.query_count << "\n"
               << "budget_exhausted " << (rep.budget_exhausted ? 1 : 0) << "\n"
               << "target_accuracy " << rep.target_eval.accuracy << "\n"
               << "surrogate_agreement " << rep.surrogate_eval.agreement << "\n"
               << "surrogate_accuracy " << rep.surrogate_eval.accuracy << "\n"
               << "gap " << rep.gap << "\n";
        }
    } catch (const std::exception& e) {
        rep.error_phase = phase;
        rep.error_message = e.what();
    }
    return rep;
}

struct GridAxis {
    std::string key;
    std::vector<std::string> values;
};

// Cartesian product of config overrides; per-cell failures are recorded and
// the grid continues. One summary CSV row per cell.
inline std::vector<ExperimentReport> run_grid(const ExperimentConfig& base,
                                              const std::vector<GridAxis>& axes,
                                              const std::string& summary_csv = "") {
    std::vector<std::vector<size_t>> cells{{}};
    for (const auto& ax : axes) {
        std::vector<std::vector<size_t>> next;
        for (const auto& cell : cells)
            for (size_t v = 0; v < ax.values.size(); ++v) {
                auto c = cell;
                c.push_back(v);
                next.push_back(std::move(c));
            }
        cells = std::move(next);
    }
    std::vector<ExperimentReport> reports;
    std::vector<std::string> rows;
    KvMap base_kv = base.to_kv();
    for (size_t i = 0; i < cells.size(); ++i) {
        KvMap kv = base_kv;
        for (size_t a = 0; a < axes.size(); ++a) kv.set(axes[a].key, axes[a].values[cells[i][a]]);
        std::string run_id = "cell" + std::to_string(i);
        ExperimentReport rep;
        try {
            ExperimentConfig cfg = ExperimentConfig::from_kv(kv);
            cfg.out_dir = base.out_dir + "/" + run_id;
            rep = run_experiment(cfg);
            rows.push_back(metrics_row(run_id, cfg, rep));
        } catch (const std::exception& e) {
            rep.error_phase = "config";
            rep.error_message = e.what();
            rows.push_back(run_id + ",error,,,,,,");
        }
        reports.push_back(std::move(rep));
    }
    if (!summary_csv.empty()) write_metrics_csv(summary_csv, rows);
    return reports;
}

}  // namespace steallab
