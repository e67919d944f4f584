#include "trc/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include "json.hpp"
#include "trc/util.hpp"

namespace trc {

using nlohmann::json;

std::string train_mode_name(TrainMode m) {
    switch (m) {
        case TrainMode::frozen: return "frozen";
        case TrainMode::full: return "full";
        case TrainMode::adapter: return "adapter";
    }
    fail_internal("bad TrainMode value");
}

std::optional<TrainMode> parse_train_mode(std::string_view name) {
    std::string n = lowercase(name);
    if (n == "frozen") return TrainMode::frozen;
    if (n == "full") return TrainMode::full;
    if (n == "adapter") return TrainMode::adapter;
    return std::nullopt;
}

void EmbeddingProvider::apply_output_grads(const SubtokenEmbeddings&, const Mat&, double) {
    fail_capability("provider " + id() + " does not support fine-tuning");
}

void EmbeddingProvider::begin_finetuning(TrainMode mode, int, int) {
    if (mode != TrainMode::frozen)
        fail_capability("provider " + id() + " does not support " + train_mode_name(mode) +
                        " fine-tuning");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr double kWeightDecay = 0.01;

void adamw_update(Vec& param, const Vec& grad, Vec& m, Vec& v, int t, double lr,
                  double weight_decay) {
    double bc1 = 1.0 - std::pow(kAdamBeta1, t);
    double bc2 = 1.0 - std::pow(kAdamBeta2, t);
    for (std::size_t i = 0; i < param.size(); ++i) {
        m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * grad[i];
        v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * grad[i] * grad[i];
        double update = (m[i] / bc1) / (std::sqrt(v[i] / bc2) + kAdamEps);
        param[i] -= lr * (update + weight_decay * param[i]);
    }
}

}  // namespace

StubProvider::StubProvider(int width, std::uint64_t seed, bool trainable, bool adapter)
    : width_(width), seed_(seed), trainable_(trainable), adapter_(adapter) {
    if (width <= 0) fail_input("stub provider width must be positive");
}

std::string StubProvider::id() const {
    return "stub-d" + std::to_string(width_) + "-s" + std::to_string(seed_);
}

Vec StubProvider::base_vector(const std::string& subtoken) const {
    Vec out(width_);
    std::uint64_t h = fnv1a(subtoken) ^ seed_;
    for (int i = 0; i < width_; ++i) {
        h = splitmix64(h);
        out[i] = static_cast<double>(h >> 11) / static_cast<double>(1ull << 53) * 2.0 - 1.0;
    }
    auto it = deltas_.find(subtoken);
    if (it != deltas_.end()) {
        for (int i = 0; i < width_; ++i) out[i] += it->second.delta[i];
    }
    return out;
}

SubtokenEmbeddings StubProvider::embed(std::string_view text) const {
    SubtokenEmbeddings out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i >= text.size()) break;
        std::size_t begin = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::string word(text.substr(begin, i - begin));
        std::vector<std::pair<std::string, CharSpan>> pieces;
        if (word.size() > 6) {
            std::size_t cut = word.size() - 3;
            pieces.emplace_back(word.substr(0, cut), CharSpan{begin, begin + cut});
            pieces.emplace_back("##" + word.substr(cut), CharSpan{begin + cut, i});
        } else {
            pieces.emplace_back(word, CharSpan{begin, i});
        }
        for (auto& [piece, span] : pieces) {
            out.vectors.push_back(base_vector(piece));
            out.offsets.push_back(span);
            out.subtokens.push_back(piece);
        }
    }
    return out;
}

std::uint64_t StubProvider::state_hash() const {
    std::string blob;
    for (const auto& [key, slot] : deltas_) {
        blob += key;
        blob.push_back('\0');
        const char* raw = reinterpret_cast<const char*>(slot.delta.data());
        blob.append(raw, slot.delta.size() * sizeof(double));
    }
    return fnv1a(blob) ^ seed_;
}

void StubProvider::apply_output_grads(const SubtokenEmbeddings& embeds, const Mat& grads,
                                      double lr) {
    if (grads.size() != embeds.subtokens.size())
        fail_internal("gradient rows do not match sub-token count");
    for (std::size_t i = 0; i < grads.size(); ++i) {
        bool nonzero = false;
        for (double g : grads[i])
            if (g != 0.0) {
                nonzero = true;
                break;
            }
        if (!nonzero) continue;
        AdamSlot& slot = deltas_[embeds.subtokens[i]];
        if (slot.delta.empty()) {
            slot.delta.assign(width_, 0.0);
            slot.m.assign(width_, 0.0);
            slot.v.assign(width_, 0.0);
        }
        slot.t += 1;
        adamw_update(slot.delta, grads[i], slot.m, slot.v, slot.t, lr, 0.0);
    }
}

void StubProvider::begin_finetuning(TrainMode mode, int, int) {
    if (mode == TrainMode::full && !trainable_)
        fail_capability("provider " + id() + " is not trainable");
    if (mode == TrainMode::adapter && !adapter_)
        fail_capability("provider " + id() + " does not support adapter fine-tuning");
}

SubtokenEmbeddings embed_context(const EmbeddingProvider& provider, const ContextWindow& ctx) {
    if (ctx.text.empty()) fail_input("cannot embed an empty context");
    if (ctx.text.size() > provider.max_chars())
        fail_input("context of " + std::to_string(ctx.text.size()) +
                   " chars exceeds provider max length");
    SubtokenEmbeddings out = provider.embed(ctx.text);
    if (out.vectors.empty()) fail_internal("provider returned no sub-tokens");
    std::size_t prev_end = 0;
    for (const CharSpan& span : out.offsets) {
        if (span.begin < prev_end || span.end <= span.begin || span.end > ctx.text.size())
            fail_internal("provider offsets are not monotone over the context");
        prev_end = span.end;
    }
    return out;
}

EventEmbedding pool_event(const SubtokenEmbeddings& embeds, CharSpan event_span) {
    EventEmbedding out;
    for (std::size_t i = 0; i < embeds.offsets.size(); ++i) {
        const CharSpan& off = embeds.offsets[i];
        if (off.begin < event_span.end && event_span.begin < off.end)
            out.subtoken_indices.push_back(i);
    }
    if (out.subtoken_indices.empty())
        fail_input("no sub-token overlaps the event span [" + std::to_string(event_span.begin) +
                   ", " + std::to_string(event_span.end) + ")");
    out.vector = embeds.vectors[out.subtoken_indices[0]];
    for (std::size_t k = 1; k < out.subtoken_indices.size(); ++k) {
        const Vec& v = embeds.vectors[out.subtoken_indices[k]];
        for (std::size_t j = 0; j < out.vector.size(); ++j)
            out.vector[j] = std::max(out.vector[j], v[j]);
    }
    return out;
}

Vec ClassifierHead::logits(const Vec& concat) const {
    if (!weights.empty() && concat.size() != weights[0].size())
        fail_input("input width " + std::to_string(concat.size()) +
                   " does not match head width " + std::to_string(weights[0].size()));
    Vec out(weights.size());
    for (std::size_t c = 0; c < weights.size(); ++c) {
        double z = bias[c];
        for (std::size_t j = 0; j < concat.size(); ++j) z += weights[c][j] * concat[j];
        out[c] = z;
    }
    return out;
}

namespace {

Vec softmax(Vec z) {
    double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - zmax);
        sum += v;
    }
    for (double& v : z) v /= sum;
    return z;
}

}  // namespace

Vec ClassifierHead::forward(const Vec& concat) const { return softmax(logits(concat)); }

ClassifierHead make_head(const std::vector<Relation>& classes, int width, std::uint64_t seed,
                         bool zero_init) {
    ClassifierHead head;
    head.classes = classes;
    head.weights.assign(classes.size(), Vec(2 * width, 0.0));
    head.bias.assign(classes.size(), 0.0);
    if (!zero_init) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> dist(-0.01, 0.01);
        for (auto& row : head.weights)
            for (double& w : row) w = dist(rng);
    }
    return head;
}

double encoder_lr_at(int step, int total_steps, const TrainConfig& cfg) {
    if (total_steps <= 0) return 0.0;
    int warmup = static_cast<int>(std::llround(cfg.warmup_fraction * total_steps));
    if (warmup > 0 && step <= warmup)
        return cfg.encoder_lr * static_cast<double>(step) / static_cast<double>(warmup);
    if (total_steps == warmup) return cfg.encoder_lr;
    return cfg.encoder_lr * static_cast<double>(total_steps - step) /
           static_cast<double>(total_steps - warmup);
}

Vec classify_pair(const ClassifierHead& head, const EventEmbedding& e1, const EventEmbedding& e2) {
    if (e1.vector.size() != e2.vector.size())
        fail_input("event embedding widths differ");
    Vec concat = e1.vector;
    concat.insert(concat.end(), e2.vector.begin(), e2.vector.end());
    return head.forward(concat);
}

double head_loss_and_grads(const ClassifierHead& head, const std::vector<TrainExample>& batch,
                           Mat& grad_w, Vec& grad_b) {
    std::size_t n_classes = head.classes.size();
    grad_w.assign(n_classes, Vec(head.weights[0].size(), 0.0));
    grad_b.assign(n_classes, 0.0);
    double loss = 0.0;
    double inv_n = 1.0 / static_cast<double>(batch.size());
    for (const TrainExample& ex : batch) {
        Vec p = head.forward(ex.concat);
        loss -= std::log(std::max(p[ex.label], 1e-300)) * inv_n;
        for (std::size_t c = 0; c < n_classes; ++c) {
            double d = (p[c] - (c == ex.label ? 1.0 : 0.0)) * inv_n;
            grad_b[c] += d;
            for (std::size_t j = 0; j < ex.concat.size(); ++j)
                grad_w[c][j] += d * ex.concat[j];
        }
    }
    return loss;
}

namespace {

struct PairFeatures {
    ContextWindow ctx;
    std::size_t label;
};

double dev_micro_f1(const EmbeddingProvider& provider, const ClassifierHead& head,
                    const std::vector<PairFeatures>& dev) {
    // Head predictions are never vague, so micro-F1 reduces to accuracy.
    std::size_t correct = 0;
    for (const auto& pf : dev) {
        SubtokenEmbeddings embeds = provider.embed(pf.ctx.text);
        EventEmbedding e1 = pool_event(embeds, pf.ctx.e1_span);
        EventEmbedding e2 = pool_event(embeds, pf.ctx.e2_span);
        Vec probs = classify_pair(head, e1, e2);
        std::size_t argmax = std::max_element(probs.begin(), probs.end()) - probs.begin();
        if (argmax == pf.label) ++correct;
    }
    return dev.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(dev.size());
}

}  // namespace

TrainResult train(EmbeddingProvider& provider, const Corpus& corpus, const TrainConfig& cfg) {
    std::vector<Relation> classes = class_order(corpus.scheme);
    std::map<Relation, std::size_t> label_index;
    for (std::size_t i = 0; i < classes.size(); ++i) label_index[classes[i]] = i;

    auto collect = [&](Split split) {
        std::vector<PairFeatures> out;
        for (std::size_t idx : corpus.pair_indices(split)) {
            const EventPair& pair = corpus.pairs[idx];
            out.push_back({build_context(pair, corpus), label_index.at(pair.gold)});
        }
        return out;
    };
    std::vector<PairFeatures> train_set = collect(Split::train);
    std::vector<PairFeatures> dev_set = collect(Split::dev);
    if (train_set.empty()) fail_input("training split is empty");
    if (dev_set.empty()) fail_input("dev split is empty");

    TrainResult result;
    result.provider_hash_before = provider.state_hash();
    if (cfg.mode != TrainMode::frozen)
        provider.begin_finetuning(cfg.mode, cfg.adapter_rank, cfg.adapter_alpha);

    ClassifierHead head = make_head(classes, provider.width(), cfg.seed);
    int steps_per_epoch =
        static_cast<int>((train_set.size() + cfg.batch_size - 1) / cfg.batch_size);
    int total_steps = cfg.epochs * steps_per_epoch;

    // Two optimizer groups: AdamW on the head at head_lr, and the scheduled
    // encoder_lr handed to the provider's own optimizer.
    Mat m_w(classes.size(), Vec(head.weights[0].size(), 0.0));
    Mat v_w = m_w;
    Vec m_b(classes.size(), 0.0);
    Vec v_b = m_b;
    int adam_t = 0;

    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    result.best_dev_f1 = -1.0;
    int step = 0;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::mt19937_64 rng(cfg.seed ^ (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), rng);

        double epoch_loss = 0.0;
        double last_encoder_lr = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            ++step;
            std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            double enc_lr = encoder_lr_at(step, total_steps, cfg);
            last_encoder_lr = enc_lr;

            std::vector<TrainExample> batch;
            struct Routed {
                SubtokenEmbeddings embeds;
                EventEmbedding e1, e2;
            };
            std::vector<Routed> routed;
            for (std::size_t k = start; k < stop; ++k) {
                const PairFeatures& pf = train_set[order[k]];
                Routed r;
                r.embeds = embed_context(provider, pf.ctx);
                r.e1 = pool_event(r.embeds, pf.ctx.e1_span);
                r.e2 = pool_event(r.embeds, pf.ctx.e2_span);
                Vec concat = r.e1.vector;
                concat.insert(concat.end(), r.e2.vector.begin(), r.e2.vector.end());
                batch.push_back({std::move(concat), pf.label});
                routed.push_back(std::move(r));
            }

            Mat grad_w;
            Vec grad_b;
            epoch_loss += head_loss_and_grads(head, batch, grad_w, grad_b);

            if (cfg.mode != TrainMode::frozen) {
                int d = provider.width();
                double inv_n = 1.0 / static_cast<double>(batch.size());
                for (std::size_t k = 0; k < batch.size(); ++k) {
                    Vec p = head.forward(batch[k].concat);
                    Vec dx(2 * d, 0.0);
                    for (std::size_t c = 0; c < classes.size(); ++c) {
                        double dl = (p[c] - (c == batch[k].label ? 1.0 : 0.0)) * inv_n;
                        for (int j = 0; j < 2 * d; ++j) dx[j] += dl * head.weights[c][j];
                    }
                    // Max pooling routes each coordinate's gradient to the
                    // sub-token that supplied the maximum.
                    Mat grads(routed[k].embeds.vectors.size(), Vec(d, 0.0));
                    auto route = [&](const EventEmbedding& ev, int offset) {
                        for (int j = 0; j < d; ++j) {
                            std::size_t winner = ev.subtoken_indices[0];
                            for (std::size_t s : ev.subtoken_indices) {
                                if (routed[k].embeds.vectors[s][j] >
                                    routed[k].embeds.vectors[winner][j])
                                    winner = s;
                            }
                            grads[winner][j] += dx[offset + j];
                        }
                    };
                    route(routed[k].e1, 0);
                    route(routed[k].e2, d);
                    provider.apply_output_grads(routed[k].embeds, grads, enc_lr);
                }
            }

            ++adam_t;
            for (std::size_t c = 0; c < classes.size(); ++c)
                adamw_update(head.weights[c], grad_w[c], m_w[c], v_w[c], adam_t, cfg.head_lr,
                             kWeightDecay);
            adamw_update(head.bias, grad_b, m_b, v_b, adam_t, cfg.head_lr, 0.0);
        }

        EpochMetrics metrics;
        metrics.epoch = epoch;
        metrics.train_loss = epoch_loss / static_cast<double>(steps_per_epoch);
        metrics.dev_micro_f1 = dev_micro_f1(provider, head, dev_set);
        metrics.encoder_lr = last_encoder_lr;
        result.history.push_back(metrics);
        if (metrics.dev_micro_f1 > result.best_dev_f1) {
            result.best_dev_f1 = metrics.dev_micro_f1;
            result.best_epoch = epoch;
            result.head = head;
        }
    }
    result.provider_hash_after = provider.state_hash();
    return result;
}

std::vector<Prediction> predict_corpus(const EmbeddingProvider& provider,
                                       const ClassifierHead& head, const Corpus& corpus,
                                       Split split) {
    std::vector<Prediction> out;
    for (std::size_t idx : corpus.pair_indices(split)) {
        const EventPair& pair = corpus.pairs[idx];
        ContextWindow ctx = build_context(pair, corpus);
        SubtokenEmbeddings embeds = embed_context(provider, ctx);
        EventEmbedding e1 = pool_event(embeds, ctx.e1_span);
        EventEmbedding e2 = pool_event(embeds, ctx.e2_span);
        Vec probs = classify_pair(head, e1, e2);
        std::size_t argmax = std::max_element(probs.begin(), probs.end()) - probs.begin();
        Prediction pred;
        pred.pair_id = pair.pair_id();
        pred.predicted = head.classes[argmax];
        out.push_back(std::move(pred));
    }
    return out;
}

std::string checkpoint_to_json(const ClassifierHead& head, const TrainConfig& cfg,
                               const std::string& provider_id) {
    json out;
    out["schema_version"] = 1;
    out["provider"] = provider_id;
    json classes = json::array();
    for (Relation r : head.classes) classes.push_back(relation_name(r));
    out["class_order"] = std::move(classes);
    out["weights"] = head.weights;
    out["bias"] = head.bias;
    out["config"] = {{"encoder_lr", cfg.encoder_lr},
                     {"head_lr", cfg.head_lr},
                     {"warmup_fraction", cfg.warmup_fraction},
                     {"batch_size", cfg.batch_size},
                     {"mode", train_mode_name(cfg.mode)},
                     {"adapter_rank", cfg.adapter_rank},
                     {"adapter_alpha", cfg.adapter_alpha},
                     {"epochs", cfg.epochs},
                     {"seed", cfg.seed}};
    return out.dump(2) + "\n";
}

ClassifierHead checkpoint_from_json(const std::string& text) {
    json doc = json::parse(text);
    ClassifierHead head;
    for (const auto& name : doc.at("class_order")) {
        auto r = parse_relation(name.get<std::string>());
        if (!r) fail_input("checkpoint has unknown class " + name.get<std::string>());
        head.classes.push_back(*r);
    }
    head.weights = doc.at("weights").get<Mat>();
    head.bias = doc.at("bias").get<Vec>();
    if (head.weights.size() != head.classes.size() || head.bias.size() != head.classes.size())
        fail_input("checkpoint weight shapes do not match class order");
    return head;
}

}  // namespace trc
