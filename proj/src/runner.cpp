#include "trc/runner.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "trc/attribution.hpp"
#include "trc/evaluation.hpp"
#include "trc/inference.hpp"
#include "trc/util.hpp"

namespace trc {

namespace fs = std::filesystem;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

RunConfig parse_run_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail_input(std::string("malformed run config: ") + e.what());
    }
    RunConfig cfg;
    cfg.corpus_path = doc.value("corpus", "");
    if (doc.contains("scheme")) {
        auto scheme = parse_scheme(doc["scheme"].get<std::string>());
        if (!scheme) fail_input("unknown scheme: " + doc["scheme"].get<std::string>());
        cfg.scheme = *scheme;
    }
    if (doc.contains("protocol")) {
        auto protocol = parse_protocol(doc["protocol"].get<std::string>());
        if (!protocol) fail_input("unknown protocol: " + doc["protocol"].get<std::string>());
        cfg.protocol = *protocol;
    }
    if (doc.contains("backend")) {
        const json& b = doc["backend"];
        cfg.backend.type = b.value("type", "mock");
        cfg.backend.script = b.value("script", "");
        cfg.backend.url = b.value("url", "");
        cfg.backend.model = b.value("model", "");
        cfg.backend.auth_env = b.value("auth_env", "TRC_API_KEY");
        cfg.backend.max_context_chars = b.value("max_context_chars", cfg.backend.max_context_chars);
        if (b.contains("retry")) {
            const json& r = b["retry"];
            cfg.backend.retry.max_attempts = r.value("max_attempts", 4);
            cfg.backend.retry.initial_delay_ms = r.value("initial_delay_ms", 100);
            cfg.backend.retry.multiplier = r.value("multiplier", 2.0);
            cfg.backend.retry.max_delay_ms = r.value("max_delay_ms", 2000);
        }
    }
    if (doc.contains("fewshot")) {
        cfg.n_sets = doc["fewshot"].value("n_sets", 5);
        cfg.fewshot_seed = doc["fewshot"].value("seed", std::uint64_t(13));
    }
    if (doc.contains("train")) {
        const json& t = doc["train"];
        cfg.train.encoder_lr = t.value("encoder_lr", 1e-5);
        cfg.train.head_lr = t.value("head_lr", 1e-4);
        cfg.train.warmup_fraction = t.value("warmup_fraction", 0.10);
        cfg.train.batch_size = t.value("batch_size", 8);
        cfg.train.adapter_rank = t.value("adapter_rank", 32);
        cfg.train.adapter_alpha = t.value("adapter_alpha", 64);
        cfg.train.epochs = t.value("epochs", 20);
        cfg.train.seed = t.value("seed", std::uint64_t(0));
        if (t.contains("mode")) {
            auto mode = parse_train_mode(t["mode"].get<std::string>());
            if (!mode) fail_input("unknown train mode: " + t["mode"].get<std::string>());
            cfg.train.mode = *mode;
        }
        if (cfg.train.encoder_lr <= 0 || cfg.train.head_lr <= 0)
            fail_input("learning rates must be positive");
        if (cfg.train.warmup_fraction < 0 || cfg.train.warmup_fraction >= 1)
            fail_input("warmup_fraction must lie in [0, 1)");
    }
    if (doc.contains("provider")) {
        const json& p = doc["provider"];
        cfg.provider.type = p.value("type", "stub");
        cfg.provider.width = p.value("width", 16);
        cfg.provider.seed = p.value("seed", std::uint64_t(1));
        cfg.provider.trainable = p.value("trainable", true);
        cfg.provider.adapter = p.value("adapter", true);
    }
    if (doc.contains("attribution")) {
        const json& a = doc["attribution"];
        cfg.attribution.n_samples = a.value("n_samples", 2048);
        cfg.attribution.k = a.value("k", 5);
        cfg.attribution.seed = a.value("seed", std::uint64_t(7));
        cfg.attribution.model = a.value("model", "encoder");
        cfg.attribution.checkpoint = a.value("checkpoint", "");
    }
    cfg.out_dir = doc.value("out", "");
    cfg.parallelism = doc.value("parallelism", 1);
    if (doc.contains("max_new_tokens")) {
        cfg.max_new_tokens_p = doc["max_new_tokens"].value("p", 8);
        cfg.max_new_tokens_qa = doc["max_new_tokens"].value("qa", 4);
    }
    cfg.config_json = doc.dump();
    return cfg;
}

std::uint64_t config_hash(const RunConfig& cfg) { return fnv1a(cfg.config_json); }

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) fail_input(msg);
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) fail_input("cannot write " + path.string());
    out << content;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_input("cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::unique_ptr<GenerationBackend> make_backend(const RunConfig& cfg) {
    if (cfg.backend.type == "mock") {
        require(!cfg.backend.script.empty(), "mock backend requires a script path");
        return MockBackend::from_script_file(cfg.backend.script);
    }
    if (cfg.backend.type == "http") {
        require(!cfg.backend.url.empty(), "http backend requires a url");
        HttpBackendConfig http;
        http.url = cfg.backend.url;
        http.model = cfg.backend.model;
        http.auth_env = cfg.backend.auth_env;
        http.max_context_chars = cfg.backend.max_context_chars;
        http.retry = cfg.backend.retry;
        return std::make_unique<HttpBackend>(http);
    }
    fail_input("unknown backend type: " + cfg.backend.type);
}

std::unique_ptr<EmbeddingProvider> make_provider(const RunConfig& cfg) {
    require(cfg.provider.type == "stub", "unknown provider type: " + cfg.provider.type);
    return std::make_unique<StubProvider>(cfg.provider.width, cfg.provider.seed,
                                          cfg.provider.trainable, cfg.provider.adapter);
}

ordered_json run_metadata(const RunConfig& cfg) {
    return ordered_json{{"config_hash", to_hex(config_hash(cfg))},
                        {"fewshot_seed", cfg.fewshot_seed},
                        {"train_seed", cfg.train.seed},
                        {"attribution_seed", cfg.attribution.seed}};
}

std::string csv_preamble(const RunConfig& cfg) {
    return "# config_hash=" + to_hex(config_hash(cfg)) + "\n";
}

json stats_to_json(const CorpusStats& stats) {
    return json{{"n_documents", stats.n_documents},
                {"n_pairs", stats.n_pairs},
                {"dropped_vague", stats.dropped_vague},
                {"splits", stats.split_counts},
                {"label_proportions", stats.label_proportions},
                {"split_label_proportions", stats.split_label_proportions},
                {"intra_proportion", stats.intra_proportion},
                {"inter_proportion", stats.inter_proportion}};
}

}  // namespace

std::string cmd_ingest(const RunConfig& cfg) {
    require(!cfg.corpus_path.empty(), "ingest requires a corpus path");
    Corpus corpus = parse_corpus(cfg.corpus_path, cfg.scheme);
    CorpusStats stats = compute_stats(corpus);
    ordered_json out = run_metadata(cfg);
    out["scheme"] = scheme_name(cfg.scheme);
    out["classes"] = scheme_relations(cfg.scheme).size();
    out["stats"] = stats_to_json(stats);
    std::string text = out.dump(2) + "\n";
    if (!cfg.out_dir.empty()) write_file(fs::path(cfg.out_dir) / "stats.json", text);
    return text;
}

std::string cmd_run(const RunConfig& cfg) {
    require(!cfg.corpus_path.empty(), "run requires a corpus path");
    require(!cfg.out_dir.empty(), "run requires an output directory");
    Corpus corpus = parse_corpus(cfg.corpus_path, cfg.scheme);
    auto backend = make_backend(cfg);

    std::vector<FewShotSet> sets = sample_fewshot_sets(corpus, cfg.n_sets, cfg.fewshot_seed);
    write_file(fs::path(cfg.out_dir) / "fewshot_sets.json", fewshot_sets_to_json(sets, corpus));

    InferenceOptions options;
    options.max_new_tokens_p = cfg.max_new_tokens_p;
    options.max_new_tokens_qa = cfg.max_new_tokens_qa;
    options.retry = cfg.backend.retry;
    options.parallelism = cfg.parallelism;

    std::vector<std::size_t> test_pairs = corpus.pair_indices(Split::test);
    BatchResult batch = run_batch(*backend, corpus, test_pairs, cfg.protocol, sets, options);

    // Transcripts, one JSONL per set.
    for (const auto& set : sets) {
        std::ostringstream lines;
        lines << run_metadata(cfg).dump() << "\n";
        for (const Transcript& ts : batch.transcripts) {
            if (ts.set_id != set.set_id) continue;
            ordered_json rec{{"pair", ts.pair_id},
                             {"set", ts.set_id},
                             {"protocol", protocol_name(ts.protocol)},
                             {"prompt_hashes", json::array()},
                             {"generations", ts.generations},
                             {"parsed_answers", ts.parsed_answers}};
            for (const std::string& prompt : ts.prompts)
                rec["prompt_hashes"].push_back(MockBackend::prompt_hash(prompt));
            lines << rec.dump() << "\n";
        }
        write_file(fs::path(cfg.out_dir) / "transcripts" /
                       (protocol_name(cfg.protocol) + "_set" + std::to_string(set.set_id) + ".jsonl"),
                   lines.str());
    }

    // Predictions.
    {
        std::ostringstream lines;
        lines << run_metadata(cfg).dump() << "\n";
        for (const Prediction& pred : batch.predictions) {
            lines << ordered_json{{"pair", pred.pair_id},
                                  {"set", pred.set_id},
                                  {"protocol", protocol_name(pred.protocol)},
                                  {"predicted", relation_name(pred.predicted)},
                                  {"contradiction", pred.contradiction},
                                  {"unparseable", pred.unparseable}}
                         .dump()
                  << "\n";
        }
        for (const FailureRecord& fr : batch.failures) {
            lines << ordered_json{{"pair", fr.pair_id}, {"set", fr.set_id}, {"failure", fr.cause}}
                         .dump()
                  << "\n";
        }
        write_file(fs::path(cfg.out_dir) / "predictions" / "predictions.jsonl", lines.str());
    }

    // Per-set evaluation against gold; pairs missing due to failures are skipped.
    std::map<std::string, std::pair<Relation, Scope>> gold_by_pair;
    for (std::size_t idx : test_pairs) {
        const EventPair& pair = corpus.pairs[idx];
        gold_by_pair[pair.pair_id()] = {pair.gold, build_context(pair, corpus).scope};
    }
    std::map<int, EvalReport> per_set;
    for (const auto& [set_id, preds] : batch.by_set) {
        std::vector<Relation> p, g;
        std::vector<Scope> scopes;
        std::size_t n_contra = 0;
        for (const Prediction& pred : preds) {
            auto it = gold_by_pair.find(pred.pair_id);
            if (it == gold_by_pair.end()) continue;
            p.push_back(pred.predicted);
            g.push_back(it->second.first);
            scopes.push_back(it->second.second);
            if (pred.contradiction) ++n_contra;
        }
        EvalReport report = evaluate(p, g, scopes, cfg.scheme);
        if (!p.empty()) report.contradiction_rate = static_cast<double>(n_contra) / p.size();
        per_set[set_id] = report;
    }

    if (per_set.empty()) {
        std::string cause = batch.failures.empty() ? "no test pairs" : batch.failures[0].cause;
        fail_backend("no prediction completed; last failure: " + cause);
    }

    RunAggregate aggregate = aggregate_runs(per_set);
    std::string model = backend->name();
    std::string protocol = protocol_name(cfg.protocol);

    ordered_json report = run_metadata(cfg);
    report["model"] = model;
    report["protocol"] = protocol;
    report["n_failures"] = batch.failures.size();
    report["contradiction_rate"] = batch.contradiction_rate;
    report["unparseable_rate"] = batch.unparseable_rate;
    report["aggregate"] = json::parse(emit_aggregate(aggregate, model, protocol, ReportFormat::json));
    std::string report_text = report.dump(2) + "\n";
    write_file(fs::path(cfg.out_dir) / "reports" / "report.json", report_text);
    write_file(fs::path(cfg.out_dir) / "reports" / "report.csv",
               csv_preamble(cfg) + emit_aggregate(aggregate, model, protocol, ReportFormat::csv));
    write_file(fs::path(cfg.out_dir) / "reports" / "report.md",
               emit_aggregate(aggregate, model, protocol, ReportFormat::markdown));
    return report_text;
}

std::string cmd_train(const RunConfig& cfg) {
    require(!cfg.corpus_path.empty(), "train requires a corpus path");
    require(!cfg.out_dir.empty(), "train requires an output directory");
    Corpus corpus = parse_corpus(cfg.corpus_path, cfg.scheme);
    auto provider = make_provider(cfg);
    // Capability guard before any work.
    provider->begin_finetuning(cfg.train.mode, cfg.train.adapter_rank, cfg.train.adapter_alpha);

    TrainResult result = train(*provider, corpus, cfg.train);
    write_file(fs::path(cfg.out_dir) / "checkpoint.json",
               checkpoint_to_json(result.head, cfg.train, provider->id()));

    std::ostringstream metrics;
    metrics << run_metadata(cfg).dump() << "\n";
    for (const EpochMetrics& em : result.history) {
        metrics << ordered_json{{"epoch", em.epoch},
                                {"train_loss", em.train_loss},
                                {"dev_micro_f1", em.dev_micro_f1},
                                {"encoder_lr", em.encoder_lr}}
                       .dump()
                << "\n";
    }
    write_file(fs::path(cfg.out_dir) / "metrics.jsonl", metrics.str());

    ordered_json out = run_metadata(cfg);
    out["mode"] = train_mode_name(cfg.train.mode);
    out["encoder_lr"] = cfg.train.encoder_lr;
    out["head_lr"] = cfg.train.head_lr;
    out["warmup_fraction"] = cfg.train.warmup_fraction;
    out["batch_size"] = cfg.train.batch_size;
    out["best_epoch"] = result.best_epoch;
    out["best_dev_micro_f1"] = result.best_dev_f1;
    out["provider_state_changed"] = result.provider_hash_before != result.provider_hash_after;
    out["checkpoint"] = (fs::path(cfg.out_dir) / "checkpoint.json").string();
    return out.dump(2) + "\n";
}

namespace {

fs::path checkpoint_path(const RunConfig& cfg) {
    if (!cfg.attribution.checkpoint.empty()) return cfg.attribution.checkpoint;
    return fs::path(cfg.out_dir) / "checkpoint.json";
}

}  // namespace

std::string cmd_predict(const RunConfig& cfg) {
    require(!cfg.corpus_path.empty(), "predict requires a corpus path");
    require(!cfg.out_dir.empty(), "predict requires an output directory");
    Corpus corpus = parse_corpus(cfg.corpus_path, cfg.scheme);
    auto provider = make_provider(cfg);
    ClassifierHead head = checkpoint_from_json(read_file(checkpoint_path(cfg)));

    std::vector<Prediction> preds = predict_corpus(*provider, head, corpus, Split::test);
    std::vector<std::size_t> test_pairs = corpus.pair_indices(Split::test);

    std::ostringstream lines;
    lines << run_metadata(cfg).dump() << "\n";
    std::vector<Relation> p, g;
    std::vector<Scope> scopes;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const EventPair& pair = corpus.pairs[test_pairs[i]];
        lines << ordered_json{{"pair", preds[i].pair_id},
                              {"predicted", relation_name(preds[i].predicted)},
                              {"gold", relation_name(pair.gold)}}
                     .dump()
              << "\n";
        p.push_back(preds[i].predicted);
        g.push_back(pair.gold);
        scopes.push_back(build_context(pair, corpus).scope);
    }
    write_file(fs::path(cfg.out_dir) / "predictions" / "encoder_predictions.jsonl", lines.str());

    EvalReport report = evaluate(p, g, scopes, cfg.scheme);
    write_file(fs::path(cfg.out_dir) / "reports" / "encoder_report.json",
               emit_report(report, ReportFormat::json));

    ordered_json out = run_metadata(cfg);
    out["n"] = report.n;
    out["micro_f1"] = report.micro_f1;
    out["intra_micro_f1"] = report.intra.micro_f1;
    out["inter_micro_f1"] = report.inter.micro_f1;
    return out.dump(2) + "\n";
}

namespace {

struct TokenizedContext {
    std::vector<std::string> tokens;
    std::vector<CharSpan> spans;
};

TokenizedContext tokenize_with_spans(const std::string& text) {
    TokenizedContext out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && text[i] == ' ') ++i;
        if (i >= text.size()) break;
        std::size_t begin = i;
        while (i < text.size() && text[i] != ' ') ++i;
        out.tokens.push_back(text.substr(begin, i - begin));
        out.spans.push_back({begin, i});
    }
    return out;
}

}  // namespace

std::string cmd_attribute(const RunConfig& cfg) {
    require(!cfg.corpus_path.empty(), "attribute requires a corpus path");
    require(!cfg.out_dir.empty(), "attribute requires an output directory");
    Corpus corpus = parse_corpus(cfg.corpus_path, cfg.scheme);
    std::vector<std::size_t> test_pairs = corpus.pair_indices(Split::test);

    std::unique_ptr<EmbeddingProvider> provider;
    ClassifierHead head;
    if (cfg.attribution.model == "encoder") {
        provider = make_provider(cfg);
        head = checkpoint_from_json(read_file(checkpoint_path(cfg)));
    } else if (cfg.attribution.model != "last_token" && cfg.attribution.model != "random_linear") {
        fail_input("unknown attribution model: " + cfg.attribution.model);
    }

    std::vector<FewShotSet> prompt_sets;
    if (cfg.attribution.model != "encoder")
        prompt_sets = sample_fewshot_sets(corpus, std::max(1, cfg.n_sets), cfg.fewshot_seed);

    std::ostringstream dump;
    dump << run_metadata(cfg).dump() << "\n";
    std::vector<PositionDistribution> runs;
    std::size_t instance_index = 0;
    for (std::size_t idx : test_pairs) {
        const EventPair& pair = corpus.pairs[idx];
        ContextWindow ctx = build_context(pair, corpus);
        MaskableInstance instance;
        int target_offset_token = 0;
        int target_length = 0;

        if (cfg.attribution.model == "encoder") {
            TokenizedContext toks = tokenize_with_spans(ctx.text);
            target_length = static_cast<int>(toks.tokens.size());
            // Original prediction on the unmasked input; attributions explain
            // this decision.
            SubtokenEmbeddings embeds = embed_context(*provider, ctx);
            EventEmbedding e1 = pool_event(embeds, ctx.e1_span);
            EventEmbedding e2 = pool_event(embeds, ctx.e2_span);
            Vec probs = classify_pair(head, e1, e2);
            std::size_t predicted =
                std::max_element(probs.begin(), probs.end()) - probs.begin();

            instance.tokens = toks.tokens;
            instance.model = [&corpus, provider = provider.get(), head = &head, toks, ctx,
                              predicted](const std::vector<std::uint8_t>& mask) {
                // Baseline replacement is the empty string: masked tokens are
                // dropped and the text re-tokenized. Fully masked events fall
                // back to a zero embedding.
                std::string text;
                std::size_t e1_begin = std::string::npos, e1_end = 0;
                std::size_t e2_begin = std::string::npos, e2_end = 0;
                for (std::size_t t = 0; t < toks.tokens.size(); ++t) {
                    if (!mask[t]) continue;
                    if (!text.empty()) text.push_back(' ');
                    std::size_t begin = text.size();
                    text += toks.tokens[t];
                    const CharSpan& orig = toks.spans[t];
                    if (orig.begin < ctx.e1_span.end && ctx.e1_span.begin < orig.end) {
                        e1_begin = std::min(e1_begin, begin);
                        e1_end = std::max(e1_end, text.size());
                    }
                    if (orig.begin < ctx.e2_span.end && ctx.e2_span.begin < orig.end) {
                        e2_begin = std::min(e2_begin, begin);
                        e2_end = std::max(e2_end, text.size());
                    }
                }
                int d = provider->width();
                Vec zero(d, 0.0);
                EventEmbedding ev1{zero, {}}, ev2{zero, {}};
                if (!text.empty()) {
                    SubtokenEmbeddings embeds = provider->embed(text);
                    if (e1_begin != std::string::npos)
                        ev1 = pool_event(embeds, {e1_begin, e1_end});
                    if (e2_begin != std::string::npos)
                        ev2 = pool_event(embeds, {e2_begin, e2_end});
                }
                Vec probs = classify_pair(*head, ev1, ev2);
                return probs[predicted];
            };
        } else {
            // Prompt-level scripted models over the rendered P prompt with the
            // first frozen few-shot set.
            PromptInstance prompt = render_p(corpus, pair, &prompt_sets[0]);
            std::vector<std::string> fewshot_tokens =
                split_whitespace(std::string_view(prompt.text).substr(0, prompt.target_offset));
            instance.tokens = split_whitespace(prompt.text);
            target_offset_token = static_cast<int>(fewshot_tokens.size());
            target_length = static_cast<int>(instance.tokens.size()) - target_offset_token;
            std::size_t m = instance.tokens.size();
            if (cfg.attribution.model == "last_token") {
                instance.model = [m](const std::vector<std::uint8_t>& mask) {
                    return static_cast<double>(mask[m - 1]);
                };
            } else {
                Vec weights(m);
                std::mt19937_64 rng(cfg.attribution.seed ^
                                    fnv1a(pair.pair_id()) * 0x9e3779b97f4a7c15ull);
                std::uniform_real_distribution<double> dist(0.0, 1.0);
                for (double& w : weights) w = dist(rng);
                instance.model = [weights](const std::vector<std::uint8_t>& mask) {
                    double acc = 0.0;
                    for (std::size_t t = 0; t < mask.size(); ++t)
                        if (mask[t]) acc += weights[t];
                    return acc;
                };
            }
        }

        AttributionResult result =
            kernelshap(instance, cfg.attribution.n_samples,
                       cfg.attribution.seed + instance_index);
        result.top_k = top_k_tokens(result, cfg.attribution.k);
        PositionDistribution dist =
            relative_positions(result.top_k, target_offset_token, target_length);
        runs.push_back(dist);

        ordered_json rec{{"pair", pair.pair_id()},
                         {"tokens", instance.tokens},
                         {"phi", result.phi},
                         {"phi0", result.phi0},
                         {"n_samples", result.n_samples},
                         {"exhaustive", result.exhaustive},
                         {"top_k", result.top_k},
                         {"positions", dist.positions},
                         {"fewshot_fraction", dist.fewshot_fraction}};
        dump << rec.dump() << "\n";
        ++instance_index;
    }
    write_file(fs::path(cfg.out_dir) / "attributions" / "attributions.jsonl", dump.str());

    if (runs.empty()) fail_input("no test pairs to attribute");
    PositionSummary summary = position_summary(runs);

    std::ostringstream csv;
    csv << csv_preamble(cfg) << "corpus,model,protocol,position\n";
    std::string corpus_name = fs::path(cfg.corpus_path).stem().string();
    for (double pos : summary.positions)
        csv << corpus_name << "," << cfg.attribution.model << "," << protocol_name(cfg.protocol)
            << "," << pos << "\n";
    write_file(fs::path(cfg.out_dir) / "attributions" / "positions.csv", csv.str());

    ordered_json out = run_metadata(cfg);
    out["model"] = cfg.attribution.model;
    out["k"] = cfg.attribution.k;
    out["n_instances"] = runs.size();
    out["median_position"] = summary.median;
    out["q1"] = summary.q1;
    out["q3"] = summary.q3;
    out["fewshot_fraction"] = summary.fewshot_fraction;
    out["kde_grid"] = summary.kde_grid;
    out["kde_density"] = summary.kde_density;
    std::string text = out.dump(2) + "\n";
    write_file(fs::path(cfg.out_dir) / "attributions" / "summary.json", text);
    return text;
}

}  // namespace trc
