#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "steallab/augment.hpp"
#include "steallab/data.hpp"
#include "steallab/pretrain.hpp"
#include "steallab/steal.hpp"

// Experiment config file: versioned plain-text `key = value` lines with
// dotted keys for nesting, '#' comments. See README for the grammar.

namespace steallab {

constexpr int kConfigVersion = 1;

class KvMap {
public:
    void set(const std::string& key, const std::string& value) { kv_[key] = value; }

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    std::string get(const std::string& key, const std::string& fallback) const {
        auto it = kv_.find(key);
        return it == kv_.end() ? fallback : it->second;
    }

    int64_t get_int(const std::string& key, int64_t fallback) const {
        auto it = kv_.find(key);
        return it == kv_.end() ? fallback : std::stoll(it->second);
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = kv_.find(key);
        return it == kv_.end() ? fallback : std::stod(it->second);
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw ConfigError("bad boolean for " + key + ": " + it->second);
    }

    static KvMap parse(const std::string& text) {
        KvMap kv;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto h = line.find('#');
            if (h != std::string::npos) line = line.substr(0, h);
            auto strip = [](std::string s) {
                size_t a = s.find_first_not_of(" \t\r");
                if (a == std::string::npos) return std::string{};
                size_t b = s.find_last_not_of(" \t\r");
                return s.substr(a, b - a + 1);
            };
            line = strip(line);
            if (line.empty()) continue;
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
            kv.set(strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
        }
        return kv;
    }

    std::string serialize() const {
        std::ostringstream out;
        for (const auto& [k, v] : kv_) out << k << " = " << v << "\n";
        return out.str();
    }

    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
};

struct ExperimentConfig {
    // target
    Method target_method = Method::SimCLR;
    ArchSpec target_arch;
    SyntheticSpec dataset;
    PretrainHyper target_hyper;
    uint64_t target_seed = 1;
    std::string target_checkpoint;  // load instead of pretraining when set

    // attack
    StealConfig steal;
    ResponseType response_type = ResponseType::Embedding;
    ArchSpec surrogate_arch;
    ShiftKind surrogate_shift = ShiftKind::None;
    double surrogate_fraction = 1.0;
    std::optional<int64_t> query_budget;

    // eval
    ProbeHyper probe;
    uint64_t probe_seed = 1;
    double train_fraction = 0.8;

    AugmentPolicy augment;
    std::string out_dir = "out";

    static ExperimentConfig from_kv(const KvMap& kv) {
        if (kv.get_int("version", -1) != kConfigVersion)
            throw ConfigError("missing or unsupported config version");
        ExperimentConfig c;
        auto arch_from = [&](const std::string& p, const SyntheticSpec& ds) {
            ArchSpec a;
            a.kind = kv.get(p + ".kind", "smallconv") == "mlp" ? ArchKind::MLP : ArchKind::SmallConv;
            a.in_channels = ds.channels;
            a.in_h = ds.height;
            a.in_w = ds.width;
            std::istringstream hs(kv.get(p + ".hidden", "8 16"));
            int h;
            a.hidden.clear();
            while (hs >> h) a.hidden.push_back(h);
            a.embed_dim = (int)kv.get_int(p + ".embed_dim", 32);
            a.proj_dim = (int)kv.get_int(p + ".proj_dim", 16);
            return a;
        };
        c.dataset.classes = (int)kv.get_int("dataset.classes", 4);
        c.dataset.samples_per_class = (int)kv.get_int("dataset.samples_per_class", 500);
        c.dataset.channels = (int)kv.get_int("dataset.channels", 3);
        c.dataset.height = (int)kv.get_int("dataset.height", 8);
        c.dataset.width = (int)kv.get_int("dataset.width", 8);
        c.dataset.generator = kv.get("dataset.generator", "blobs");
        c.dataset.noise_sigma = kv.get_double("dataset.noise_sigma", 0.05);
        c.dataset.seed = (uint64_t)kv.get_int("dataset.seed", 1);

        c.target_method = parse_method(kv.get("target.method", "simclr"));
        c.target_arch = arch_from("target.arch", c.dataset);
        c.target_hyper.epochs = (int)kv.get_int("target.epochs", 50);
        c.target_hyper.batch_size = (int)kv.get_int("target.batch_size", 64);
        c.target_hyper.lr = kv.get_double("target.lr", 1e-3);
        c.target_hyper.tau_simclr = kv.get_double("target.tau", 0.5);
        c.target_hyper.tau_moco = kv.get_double("target.tau_moco", 0.07);
        c.target_hyper.moco_queue = kv.get_int("target.moco_queue", 1024);
        c.target_hyper.moco_momentum = kv.get_double("target.moco_momentum", 0.99);
        c.target_hyper.byol_decay = kv.get_double("target.byol_decay", 0.99);
        c.target_seed = (uint64_t)kv.get_int("target.seed", 1);
        c.target_checkpoint = kv.get("target.checkpoint", "");

        c.augment.n = (int)kv.get_int("augment.n", 2);
        c.augment.m = (int)kv.get_int("augment.m", 14);
        c.augment.rng_seed = (uint64_t)kv.get_int("augment.seed", 1);
        if (kv.has("augment.ops")) {
            std::istringstream os(kv.get("augment.ops", ""));
            std::string op;
            c.augment.op_set.clear();
            while (os >> op) c.augment.op_set.push_back(parse_aug_op(op));
        }
        c.target_hyper.augment = c.augment;

        c.steal.attack = parse_attack(kv.get("attack.kind", "cont-steal"));
        c.response_type = parse_response_type(kv.get("attack.response_type", "embedding"));
        c.steal.tau = kv.get_double("attack.tau", 0.5);
        c.steal.epochs = (int)kv.get_int("attack.epochs", 30);
        c.steal.batch_size = (int)kv.get_int("attack.batch_size", 64);
        c.steal.lr = kv.get_double("attack.lr", 1e-3);
        c.steal.include_d_self = kv.get_bool("attack.include_d_self", true);
        c.steal.include_d_encoder_negatives = kv.get_bool("attack.include_d_encoder_negatives", true);
        c.steal.seed = (uint64_t)kv.get_int("attack.seed", 1);
        c.steal.augment = c.augment;
        c.surrogate_arch = arch_from("attack.surrogate_arch", c.dataset);
        c.surrogate_shift = parse_shift(kv.get("attack.surrogate_shift", "none"));
        c.surrogate_fraction = kv.get_double("attack.surrogate_fraction", 1.0);
        if (kv.has("attack.budget")) c.query_budget = kv.get_int("attack.budget", 0);

        c.probe.epochs = (int)kv.get_int("eval.probe_epochs", 100);
        c.probe.batch_size = (int)kv.get_int("eval.probe_batch_size", 128);
        c.probe.lr = kv.get_double("eval.probe_lr", 3e-4);
        c.probe_seed = (uint64_t)kv.get_int("eval.seed", 1);
        c.train_fraction = kv.get_double("eval.train_fraction", 0.8);

        c.out_dir = kv.get("output.dir", "out");
        return c;
    }

    KvMap to_kv() const {
        KvMap kv;
        kv.set("version", std::to_string(kConfigVersion));
        kv.set("dataset.classes", std::to_string(dataset.classes));
        kv.set("dataset.samples_per_class", std::to_string(dataset.samples_per_class));
        kv.set("dataset.channels", std::to_string(dataset.channels));
        kv.set("dataset.height", std::to_string(dataset.height));
        kv.set("dataset.width", std::to_string(dataset.width));
        kv.set("dataset.generator", dataset.generator);
        kv.set("dataset.noise_sigma", fmt(dataset.noise_sigma));
        kv.set("dataset.seed", std::to_string(dataset.seed));
        auto arch_to = [&](const std::string& p, const ArchSpec& a) {
            kv.set(p + ".kind", a.kind == ArchKind::MLP ? "mlp" : "smallconv");
            std::string hs;
            for (int h : a.hidden) hs += (hs.empty() ? "" : " ") + std::to_string(h);
            kv.set(p + ".hidden", hs);
            kv.set(p + ".embed_dim", std::to_string(a.embed_dim));
            kv.set(p + ".proj_dim", std::to_string(a.proj_dim));
        };
        kv.set("target.method", method_name(target_method));
        arch_to("target.arch", target_arch);
        kv.set("target.epochs", std::to_string(target_hyper.epochs));
        kv.set("target.batch_size", std::to_string(target_hyper.batch_size));
        kv.set("target.lr", fmt(target_hyper.lr));
        kv.set("target.tau", fmt(target_hyper.tau_simclr));
        kv.set("target.tau_moco", fmt(target_hyper.tau_moco));
        kv.set("target.moco_queue", std::to_string(target_hyper.moco_queue));
        kv.set("target.moco_momentum", fmt(target_hyper.moco_momentum));
        kv.set("target.byol_decay", fmt(target_hyper.byol_decay));
        kv.set("target.seed", std::to_string(target_seed));
        if (!target_checkpoint.empty()) kv.set("target.checkpoint", target_checkpoint);
        kv.set("augment.n", std::to_string(augment.n));
        kv.set("augment.m", std::to_string(augment.m));
        kv.set("augment.seed", std::to_string(augment.rng_seed));
        std::string ops;
        for (AugOp op : augment.op_set) ops += (ops.empty() ? "" : " ") + aug_op_name(op);
        kv.set("augment.ops", ops);
        kv.set("attack.kind", attack_name(steal.attack));
        kv.set("attack.response_type", response_type_name(response_type));
        kv.set("attack.tau", fmt(steal.tau));
        kv.set("attack.epochs", std::to_string(steal.epochs));
        kv.set("attack.batch_size", std::to_string(steal.batch_size));
        kv.set("attack.lr", fmt(steal.lr));
        kv.set("attack.include_d_self", steal.include_d_self ? "true" : "false");
        kv.set("attack.include_d_encoder_negatives",
               steal.include_d_encoder_negatives ? "true" : "false");
        kv.set("attack.seed", std::to_string(steal.seed));
        arch_to("attack.surrogate_arch", surrogate_arch);
        kv.set("attack.surrogate_shift", shift_name(surrogate_shift));
        kv.set("attack.surrogate_fraction", fmt(surrogate_fraction));
        if (query_budget) kv.set("attack.budget", std::to_string(*query_budget));
        kv.set("eval.probe_epochs", std::to_string(probe.epochs));
        kv.set("eval.probe_batch_size", std::to_string(probe.batch_size));
        kv.set("eval.probe_lr", fmt(probe.lr));
        kv.set("eval.seed", std::to_string(probe_seed));
        kv.set("eval.train_fraction", fmt(train_fraction));
        kv.set("output.dir", out_dir);
        return kv;
    }

    uint64_t hash() const {
        std::string s = to_kv().serialize();
        return fnv1a(s.data(), s.size());
    }

    static std::string shift_name(ShiftKind s) {
        switch (s) {
            case ShiftKind::None: return "none";
            case ShiftKind::TemplateSwap: return "template-swap";
            case ShiftKind::NoiseUp: return "noise-up";
            case ShiftKind::ClassSuperset: return "class-superset";
        }
        return "?";
    }

private:
    static std::string fmt(double v) {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return buf;
    }
};

}  // namespace steallab
