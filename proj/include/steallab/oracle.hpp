#pragma once

#include <optional>
#include <string>

#include "steallab/eval.hpp"
#include "steallab/nn.hpp"

namespace steallab {

enum class ResponseType { Label, Posterior, Embedding };

inline ResponseType parse_response_type(const std::string& s) {
    if (s == "label") return ResponseType::Label;
    if (s == "posterior") return ResponseType::Posterior;
    if (s == "embedding") return ResponseType::Embedding;
    throw ConfigError("unknown response type '" + s + "'");
}

inline std::string response_type_name(ResponseType r) {
    switch (r) {
        case ResponseType::Label: return "label";
        case ResponseType::Posterior: return "posterior";
        case ResponseType::Embedding: return "embedding";
    }
    return "?";
}

struct Response {
    ResponseType type;
    std::vector<int> labels;  // Label
    Tensor values;            // Posterior [B,classes] or Embedding [B,D]
};

// Black-box view of a frozen target. Embedding responses are raw backbone
// outputs (no projector); Label/Posterior go through the target's downstream
// linear layer. Every call charges the batch size against the budget.
class TargetOracle {
public:
    TargetOracle(EncoderModel model, ResponseType response_type,
                 std::optional<LinearProbe> probe = std::nullopt,
                 std::optional<int64_t> query_budget = std::nullopt)
        : model_(std::move(model)),
          probe_(std::move(probe)),
          response_type_(response_type),
          budget_(query_budget) {
        if (response_type_ != ResponseType::Embedding && !probe_)
            throw ConfigError("label/posterior oracle needs the target's downstream layer");
        if (budget_ && *budget_ <= 0) throw ConfigError("budget must be positive");
    }

    Response query(const Tensor& batch) {
        int64_t B = batch.dim(0);
        if (budget_ && query_count_ + B > *budget_)
            throw BudgetExhaustedError(std::to_string(query_count_) + " used of " +
                                       std::to_string(*budget_) + ", batch of " + std::to_string(B));
        query_count_ += B;
        Response r;
        r.type = response_type_;
        Tensor emb = forward_embed(model_, batch, false);
        if (response_type_ == ResponseType::Embedding) {
            r.values = std::move(emb);
        } else {
            Tensor logits = probe_logits(*probe_, emb);
            if (response_type_ == ResponseType::Label) {
                r.labels = predict_labels(logits);
            } else {
                r.values = ad::softmax_rows(ad::Var::leaf(logits, false)).value();
            }
        }
        return r;
    }

    int64_t query_count() const { return query_count_; }
    std::optional<int64_t> budget() const { return budget_; }
    ResponseType response_type() const { return response_type_; }
    const EncoderModel& model() const { return model_; }
    const std::optional<LinearProbe>& probe() const { return probe_; }
    int64_t remaining() const { return budget_ ? *budget_ - query_count_ : -1; }
    uint64_t model_hash() const { return hash_params(model_.params); }

private:
    const EncoderModel model_;
    const std::optional<LinearProbe> probe_;
    ResponseType response_type_;
    std::optional<int64_t> budget_;
    int64_t query_count_ = 0;
};

}  // namespace steallab
