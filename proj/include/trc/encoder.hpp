#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "trc/corpus.hpp"
#include "trc/inference.hpp"

namespace trc {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

enum class TrainMode { frozen, full, adapter };

std::string train_mode_name(TrainMode m);
std::optional<TrainMode> parse_train_mode(std::string_view name);

struct SubtokenEmbeddings {
    Mat vectors;                   // n x d
    std::vector<CharSpan> offsets; // character interval of each sub-token
    std::vector<std::string> subtokens;
};

// Abstracts the encoder: a stub for tests, or any model exposing per-sub-token
// vectors with character offsets. Deterministic in evaluation mode.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual int width() const = 0;
    virtual bool trainable() const = 0;
    virtual bool supports_adapter() const = 0;
    virtual std::size_t max_chars() const { return std::size_t(1) << 20; }
    virtual std::string id() const = 0;
    virtual SubtokenEmbeddings embed(std::string_view text) const = 0;
    virtual std::uint64_t state_hash() const = 0;
    // Fine-tuning surface: consumes the loss gradient wrt the provider's
    // output vectors for one embedded text, at the scheduled learning rate.
    virtual void apply_output_grads(const SubtokenEmbeddings& embeds, const Mat& grads, double lr);
    // Called once before training in full/adapter mode; errors when the
    // requested capability is missing.
    virtual void begin_finetuning(TrainMode mode, int rank, int alpha);
};

// Whitespace tokenizer with hash-seeded deterministic embeddings and a
// trainable per-token delta table. Words longer than 6 chars split into two
// sub-tokens so max pooling sees trailing morphology.
class StubProvider : public EmbeddingProvider {
public:
    StubProvider(int width, std::uint64_t seed, bool trainable = true, bool adapter = true);

    int width() const override { return width_; }
    bool trainable() const override { return trainable_; }
    bool supports_adapter() const override { return adapter_; }
    std::string id() const override;
    SubtokenEmbeddings embed(std::string_view text) const override;
    std::uint64_t state_hash() const override;
    void apply_output_grads(const SubtokenEmbeddings& embeds, const Mat& grads, double lr) override;
    void begin_finetuning(TrainMode mode, int rank, int alpha) override;

private:
    Vec base_vector(const std::string& subtoken) const;

    int width_;
    std::uint64_t seed_;
    bool trainable_;
    bool adapter_;
    struct AdamSlot {
        Vec delta, m, v;
        int t = 0;
    };
    std::map<std::string, AdamSlot> deltas_;
};

struct EventEmbedding {
    Vec vector;
    std::vector<std::size_t> subtoken_indices;  // contributors, >= 1
};

struct ClassifierHead {
    Mat weights;  // classes x 2d
    Vec bias;
    std::vector<Relation> classes;  // alphabetical per scheme

    Vec logits(const Vec& concat) const;
    Vec forward(const Vec& concat) const;  // softmax probabilities
};

ClassifierHead make_head(const std::vector<Relation>& classes, int width, std::uint64_t seed,
                         bool zero_init = false);

struct TrainConfig {
    double encoder_lr = 1e-5;
    double head_lr = 1e-4;
    double warmup_fraction = 0.10;
    int batch_size = 8;
    TrainMode mode = TrainMode::frozen;
    int adapter_rank = 32;
    int adapter_alpha = 64;
    int epochs = 20;
    std::uint64_t seed = 0;
};

// Linear warmup to encoder_lr over warmup_fraction of total steps, then
// linear decay to zero. step is 1-based.
double encoder_lr_at(int step, int total_steps, const TrainConfig& cfg);

SubtokenEmbeddings embed_context(const EmbeddingProvider& provider, const ContextWindow& ctx);

// Elementwise max over every sub-token whose character interval intersects
// the event span.
EventEmbedding pool_event(const SubtokenEmbeddings& embeds, CharSpan event_span);

// softmax(W . concat(e1, e2) + b); concat order is (e1, e2), never sorted.
Vec classify_pair(const ClassifierHead& head, const EventEmbedding& e1, const EventEmbedding& e2);

struct TrainExample {
    Vec concat;       // pooled e1 ++ e2
    std::size_t label;  // index into head.classes
};

// Mean cross-entropy over the batch plus analytic gradients; the unit the
// finite-difference check runs against.
double head_loss_and_grads(const ClassifierHead& head, const std::vector<TrainExample>& batch,
                           Mat& grad_w, Vec& grad_b);

struct EpochMetrics {
    int epoch = 0;
    double train_loss = 0.0;
    double dev_micro_f1 = 0.0;
    double encoder_lr = 0.0;
};

struct TrainResult {
    ClassifierHead head;  // best dev micro-F1 checkpoint
    int best_epoch = 0;
    double best_dev_f1 = 0.0;
    std::vector<EpochMetrics> history;
    std::uint64_t provider_hash_before = 0;
    std::uint64_t provider_hash_after = 0;
};

TrainResult train(EmbeddingProvider& provider, const Corpus& corpus, const TrainConfig& cfg);

std::vector<Prediction> predict_corpus(const EmbeddingProvider& provider,
                                       const ClassifierHead& head, const Corpus& corpus,
                                       Split split);

std::string checkpoint_to_json(const ClassifierHead& head, const TrainConfig& cfg,
                               const std::string& provider_id);
ClassifierHead checkpoint_from_json(const std::string& text);

}  // namespace trc
