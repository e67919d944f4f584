#pragma once

#include <map>
#include <string>
#include <vector>

#include "trc/corpus.hpp"

namespace trc {

struct ClassScores {
    std::size_t support = 0;  // gold count
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool absent_from_gold = false;
};

struct SliceScores {
    std::size_t n = 0;
    std::size_t tp = 0;
    double micro_f1 = 0.0;
    double proportion = 0.0;
    bool empty = false;
};

struct EvalReport {
    std::size_t n = 0;
    std::size_t tp = 0;
    std::size_t n_nonvague_predictions = 0;
    double precision = 0.0;
    double recall = 0.0;
    double micro_f1 = 0.0;
    std::map<std::string, ClassScores> per_class;
    SliceScores intra;
    SliceScores inter;
    double vague_rate = 0.0;
    double contradiction_rate = 0.0;
};

struct RunAggregate {
    std::map<int, EvalReport> per_set;
    double mean_micro_f1 = 0.0;
    double std_micro_f1 = 0.0;  // population std over the frozen sets
};

// Micro-F1 with vague as a recall-only failure bucket: TP counts correct
// non-vague predictions, precision divides by non-vague predictions, recall
// by all gold pairs. Golds must not contain vague.
double micro_f1(const std::vector<Relation>& preds, const std::vector<Relation>& golds);

ClassScores per_class_f1(const std::vector<Relation>& preds, const std::vector<Relation>& golds,
                         Relation c);

// Micro-F1 restricted to intra- and inter-sentence pairs; scopes align with
// the prediction list.
std::pair<SliceScores, SliceScores> slice_intra_inter(const std::vector<Relation>& preds,
                                                      const std::vector<Relation>& golds,
                                                      const std::vector<Scope>& scopes);

EvalReport evaluate(const std::vector<Relation>& preds, const std::vector<Relation>& golds,
                    const std::vector<Scope>& scopes, Scheme scheme);

RunAggregate aggregate_runs(const std::map<int, EvalReport>& per_set);

struct ErrorIntersection {
    std::vector<std::string> pair_ids;  // a wrong, b correct
    double fraction_of_a_errors = 0.0;
    double fraction_of_test_set = 0.0;
};

ErrorIntersection error_intersection(const std::vector<Relation>& preds_a,
                                     const std::vector<Relation>& preds_b,
                                     const std::vector<Relation>& golds,
                                     const std::vector<std::string>& pair_ids);

enum class ReportFormat { json, csv, markdown };

// Deterministic renderings; identical inputs produce identical bytes.
std::string emit_report(const EvalReport& report, ReportFormat format);
std::string emit_aggregate(const RunAggregate& aggregate, const std::string& model,
                           const std::string& protocol, ReportFormat format);

}  // namespace trc
