#include "trc/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "trc/util.hpp"

namespace trc {

using nlohmann::json;

std::string split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::dev: return "dev";
        case Split::test: return "test";
    }
    fail_internal("bad Split value");
}

const Document& Corpus::document_of(const EventPair& pair) const {
    return documents.at(pair.doc_index);
}

const EventTrigger& Corpus::event_of(const EventPair& pair, bool first) const {
    const Document& doc = document_of(pair);
    return doc.events.at(first ? pair.e1_id : pair.e2_id);
}

std::vector<std::size_t> Corpus::pair_indices(Split split) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (pairs[i].split == split) out.push_back(i);
    }
    return out;
}

namespace {

[[noreturn]] void fail_line(std::size_t line_no, const std::string& msg) {
    fail_input("line " + std::to_string(line_no) + ": " + msg);
}

Split parse_split(const std::string& name, std::size_t line_no) {
    if (name == "train") return Split::train;
    if (name == "dev") return Split::dev;
    if (name == "test") return Split::test;
    fail_line(line_no, "unknown split \"" + name + "\"");
}

Relation parse_gold(const std::string& raw, Scheme scheme, std::size_t line_no) {
    std::string low = lowercase(raw);
    if (low == "simultaneous") {
        if (scheme == Scheme::tbdense) return Relation::equal;
        fail_line(line_no, "relation \"simultaneous\" is only valid under the tbdense scheme");
    }
    auto rel = parse_relation(raw);
    if (!rel) fail_line(line_no, "unknown relation name \"" + raw + "\"");
    if (*rel == Relation::vague) return Relation::vague;
    const auto& allowed = scheme_relations(scheme);
    if (std::find(allowed.begin(), allowed.end(), *rel) == allowed.end()) {
        fail_line(line_no, "relation \"" + raw + "\" is not in the " + scheme_name(scheme) + " scheme");
    }
    return *rel;
}

Document parse_document(const json& rec, std::size_t line_no) {
    if (!rec.is_object()) fail_line(line_no, "record is not a JSON object");
    Document doc;
    if (!rec.contains("doc_id") || !rec["doc_id"].is_string())
        fail_line(line_no, "missing or non-string doc_id");
    doc.doc_id = rec["doc_id"].get<std::string>();

    if (!rec.contains("sentences") || !rec["sentences"].is_array())
        fail_line(line_no, "missing sentences array");
    for (const auto& sent : rec["sentences"]) {
        if (!sent.is_array() || sent.empty())
            fail_line(line_no, "empty or non-array sentence in doc " + doc.doc_id);
        Sentence s;
        for (const auto& tok : sent) {
            if (!tok.is_string()) fail_line(line_no, "non-string token in doc " + doc.doc_id);
            s.tokens.push_back(tok.get<std::string>());
        }
        doc.sentences.push_back(std::move(s));
    }

    for (const auto& ev : rec.value("events", json::array())) {
        EventTrigger trig;
        if (!ev.contains("id") || !ev["id"].is_string())
            fail_line(line_no, "event without id in doc " + doc.doc_id);
        trig.event_id = ev["id"].get<std::string>();
        trig.sentence_index = ev.value("sentence", -1);
        if (trig.sentence_index < 0 ||
            trig.sentence_index >= static_cast<int>(doc.sentences.size()))
            fail_line(line_no, "event " + trig.event_id + " has out-of-range sentence index");
        const auto& span = ev.value("span", json::array());
        if (span.size() != 2 || !span[0].is_number_integer() || !span[1].is_number_integer())
            fail_line(line_no, "event " + trig.event_id + " has malformed span");
        trig.span_start = span[0].get<int>();
        trig.span_end = span[1].get<int>();
        int n_tokens = static_cast<int>(doc.sentences[trig.sentence_index].tokens.size());
        if (trig.span_start < 0 || trig.span_start >= trig.span_end || trig.span_end > n_tokens)
            fail_line(line_no, "event " + trig.event_id + " span out of range");
        if (doc.events.count(trig.event_id))
            fail_line(line_no, "duplicate event id " + trig.event_id + " in doc " + doc.doc_id);
        doc.events[trig.event_id] = trig;
    }
    return doc;
}

}  // namespace

Corpus parse_corpus(const std::string& path, Scheme scheme) {
    std::ifstream in(path);
    if (!in) fail_input("cannot open corpus file: " + path);

    Corpus corpus;
    corpus.scheme = scheme;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            fail_line(line_no, std::string("malformed JSON record (") + e.what() + ")");
        }
        Document doc = parse_document(rec, line_no);
        Split split = parse_split(rec.value("split", "train"), line_no);
        std::size_t doc_index = corpus.documents.size();

        for (const auto& pr : rec.value("pairs", json::array())) {
            EventPair pair;
            pair.doc_index = doc_index;
            pair.doc_id = doc.doc_id;
            pair.e1_id = pr.value("e1", "");
            pair.e2_id = pr.value("e2", "");
            if (!doc.events.count(pair.e1_id))
                fail_line(line_no, "pair references unknown event " + pair.e1_id);
            if (!doc.events.count(pair.e2_id))
                fail_line(line_no, "pair references unknown event " + pair.e2_id);
            if (pair.e1_id == pair.e2_id)
                fail_line(line_no, "pair with identical events " + pair.e1_id);
            if (!pr.contains("relation") || !pr["relation"].is_string())
                fail_line(line_no, "pair without relation string");
            pair.gold = parse_gold(pr["relation"].get<std::string>(), scheme, line_no);
            pair.split = split;
            if (pair.gold == Relation::vague) {
                ++corpus.dropped_vague;
                continue;
            }
            corpus.pairs.push_back(std::move(pair));
        }
        corpus.documents.push_back(std::move(doc));
    }
    return corpus;
}

std::string corpus_to_jsonl(const Corpus& corpus) {
    std::ostringstream out;
    for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
        const Document& doc = corpus.documents[d];
        json rec;
        rec["doc_id"] = doc.doc_id;
        json sentences = json::array();
        for (const auto& s : doc.sentences) sentences.push_back(s.tokens);
        rec["sentences"] = std::move(sentences);
        json events = json::array();
        for (const auto& [id, ev] : doc.events) {
            events.push_back({{"id", id},
                              {"sentence", ev.sentence_index},
                              {"span", {ev.span_start, ev.span_end}}});
        }
        rec["events"] = std::move(events);
        json pairs = json::array();
        std::string split = "train";
        for (const auto& pair : corpus.pairs) {
            if (pair.doc_index != d) continue;
            pairs.push_back({{"e1", pair.e1_id},
                             {"e2", pair.e2_id},
                             {"relation", relation_name(pair.gold)}});
            split = split_name(pair.split);
        }
        rec["pairs"] = std::move(pairs);
        rec["split"] = split;
        out << rec.dump() << "\n";
    }
    return out.str();
}

namespace {

// Character span of a token range inside a sentence joined by single spaces.
CharSpan token_char_span(const Sentence& sent, int start, int end, std::size_t base) {
    std::size_t begin = base;
    for (int i = 0; i < start; ++i) begin += sent.tokens[i].size() + 1;
    std::size_t stop = begin;
    for (int i = start; i < end; ++i) {
        stop += sent.tokens[i].size();
        if (i + 1 < end) stop += 1;
    }
    return {begin, stop};
}

std::string join_tokens(const Sentence& sent) {
    std::string out;
    for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += sent.tokens[i];
    }
    return out;
}

}  // namespace

ContextWindow build_context(const EventPair& pair, const Corpus& corpus) {
    const Document& doc = corpus.document_of(pair);
    const EventTrigger& e1 = corpus.event_of(pair, true);
    const EventTrigger& e2 = corpus.event_of(pair, false);

    ContextWindow ctx;
    if (e1.sentence_index == e2.sentence_index) {
        const Sentence& sent = doc.sentences[e1.sentence_index];
        ctx.text = join_tokens(sent);
        ctx.scope = Scope::intra;
        ctx.e1_span = token_char_span(sent, e1.span_start, e1.span_end, 0);
        ctx.e2_span = token_char_span(sent, e2.span_start, e2.span_end, 0);
    } else {
        // Document order, regardless of which event is the pair's first argument.
        const EventTrigger& first_ev = e1.sentence_index < e2.sentence_index ? e1 : e2;
        const EventTrigger& second_ev = e1.sentence_index < e2.sentence_index ? e2 : e1;
        const Sentence& s_first = doc.sentences[first_ev.sentence_index];
        const Sentence& s_second = doc.sentences[second_ev.sentence_index];
        ctx.text = join_tokens(s_first) + " " + join_tokens(s_second);
        ctx.scope = Scope::inter;
        std::size_t second_base = join_tokens(s_first).size() + 1;
        CharSpan first_span = token_char_span(s_first, first_ev.span_start, first_ev.span_end, 0);
        CharSpan second_span =
            token_char_span(s_second, second_ev.span_start, second_ev.span_end, second_base);
        if (&first_ev == &e1) {
            ctx.e1_span = first_span;
            ctx.e2_span = second_span;
        } else {
            ctx.e1_span = second_span;
            ctx.e2_span = first_span;
        }
    }
    return ctx;
}

std::string tagged_event(const ContextWindow& ctx, bool first) {
    const CharSpan& span = first ? ctx.e1_span : ctx.e2_span;
    std::string surface = ctx.text.substr(span.begin, span.length());
    std::string tag = first ? "event1" : "event2";
    return "[" + tag + "] " + surface + " [/" + tag + "]";
}

std::string tag_events(const ContextWindow& ctx) {
    const CharSpan& a = ctx.e1_span;
    const CharSpan& b = ctx.e2_span;
    if (a.begin < b.end && b.begin < a.end)
        fail_input("overlapping event spans cannot be tagged");

    // Insert right-to-left so earlier offsets stay valid.
    struct Insertion {
        CharSpan span;
        const char* open;
        const char* close;
    };
    Insertion first{a, "[event1] ", " [/event1]"};
    Insertion second{b, "[event2] ", " [/event2]"};
    if (first.span.begin < second.span.begin) std::swap(first, second);

    std::string out = ctx.text;
    for (const Insertion& ins : {first, second}) {
        out.insert(ins.span.end, ins.close);
        out.insert(ins.span.begin, ins.open);
    }
    return out;
}

CorpusStats compute_stats(const Corpus& corpus) {
    CorpusStats stats;
    stats.n_documents = corpus.documents.size();
    stats.n_pairs = corpus.pairs.size();
    stats.dropped_vague = corpus.dropped_vague;
    stats.split_counts = {{"train", 0}, {"dev", 0}, {"test", 0}};

    std::map<std::string, std::size_t> label_counts;
    std::map<std::string, std::map<std::string, std::size_t>> split_label_counts;
    std::size_t intra = 0;
    for (const auto& pair : corpus.pairs) {
        std::string split = split_name(pair.split);
        stats.split_counts[split] += 1;
        label_counts[relation_name(pair.gold)] += 1;
        split_label_counts[split][relation_name(pair.gold)] += 1;
        const EventTrigger& e1 = corpus.event_of(pair, true);
        const EventTrigger& e2 = corpus.event_of(pair, false);
        if (e1.sentence_index == e2.sentence_index) ++intra;
    }
    if (stats.n_pairs > 0) {
        double n = static_cast<double>(stats.n_pairs);
        for (const auto& [label, count] : label_counts)
            stats.label_proportions[label] = static_cast<double>(count) / n;
        for (const auto& [split, counts] : split_label_counts) {
            double split_n = static_cast<double>(stats.split_counts[split]);
            for (const auto& [label, count] : counts)
                stats.split_label_proportions[split][label] = static_cast<double>(count) / split_n;
        }
        stats.intra_proportion = static_cast<double>(intra) / n;
        stats.inter_proportion = static_cast<double>(stats.n_pairs - intra) / n;
    }
    return stats;
}

}  // namespace trc
