#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "trc/relations.hpp"

namespace trc {

struct Sentence {
    std::vector<std::string> tokens;
};

struct EventTrigger {
    std::string event_id;
    int sentence_index = 0;
    // Half-open token span [start, end).
    int span_start = 0;
    int span_end = 0;
};

struct Document {
    std::string doc_id;
    std::vector<Sentence> sentences;
    std::map<std::string, EventTrigger> events;
};

enum class Split { train, dev, test };

std::string split_name(Split s);

struct EventPair {
    std::size_t doc_index = 0;
    std::string doc_id;
    std::string e1_id;
    std::string e2_id;
    Relation gold = Relation::before;
    Split split = Split::train;

    std::string pair_id() const { return doc_id + ":" + e1_id + ":" + e2_id; }
};

enum class Scope { intra, inter };

struct CharSpan {
    std::size_t begin = 0;
    std::size_t end = 0;  // half-open

    std::size_t length() const { return end - begin; }
};

// The (possibly concatenated) sentence context holding both events.
struct ContextWindow {
    std::string text;
    CharSpan e1_span;
    CharSpan e2_span;
    Scope scope = Scope::intra;
};

struct Corpus {
    Scheme scheme = Scheme::matres;
    std::vector<Document> documents;
    std::vector<EventPair> pairs;
    std::size_t dropped_vague = 0;

    const Document& document_of(const EventPair& pair) const;
    const EventTrigger& event_of(const EventPair& pair, bool first) const;
    std::vector<std::size_t> pair_indices(Split split) const;
};

struct CorpusStats {
    std::size_t n_documents = 0;
    std::size_t n_pairs = 0;
    std::size_t dropped_vague = 0;
    std::map<std::string, std::size_t> split_counts;              // train/dev/test
    std::map<std::string, double> label_proportions;              // over all pairs
    std::map<std::string, std::map<std::string, double>> split_label_proportions;
    double intra_proportion = 0.0;
    double inter_proportion = 0.0;
};

// Parses the canonical JSONL format, one document per line. Applies the
// scheme's ingestion rules: simultaneous -> equal (TB-Dense), gold vague
// pairs dropped and counted. Validation failures carry line numbers.
Corpus parse_corpus(const std::string& path, Scheme scheme);

// Serializes back to the canonical JSONL format (dropped pairs are gone).
std::string corpus_to_jsonl(const Corpus& corpus);

// Joins the relevant sentence(s) with single spaces. Inter-sentence pairs
// concatenate the two sentences in document order.
ContextWindow build_context(const EventPair& pair, const Corpus& corpus);

// Wraps the two event surfaces with [event1]..[/event1] / [event2]..[/event2].
std::string tag_events(const ContextWindow& ctx);

// Tagged surface of one event, e.g. "[event1] accused [/event1]".
std::string tagged_event(const ContextWindow& ctx, bool first);

CorpusStats compute_stats(const Corpus& corpus);

}  // namespace trc
