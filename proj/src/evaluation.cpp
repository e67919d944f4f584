#include "trc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "trc/util.hpp"

namespace trc {

using nlohmann::json;

namespace {

void check_lengths(std::size_t a, std::size_t b) {
    if (a != b)
        fail_input("prediction/gold length mismatch: " + std::to_string(a) + " vs " +
                   std::to_string(b));
}

struct MicroCounts {
    std::size_t n = 0;
    std::size_t tp = 0;
    std::size_t nonvague = 0;

    double precision() const {
        return nonvague == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(nonvague);
    }
    double recall() const {
        return n == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(n);
    }
    double f1() const {
        if (tp == 0) return 0.0;
        double p = precision(), r = recall();
        return 2.0 * p * r / (p + r);
    }
};

MicroCounts micro_counts(const std::vector<Relation>& preds, const std::vector<Relation>& golds) {
    check_lengths(preds.size(), golds.size());
    MicroCounts counts;
    counts.n = preds.size();
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (golds[i] == Relation::vague) fail_input("gold labels must not contain vague");
        if (preds[i] == Relation::vague) continue;
        ++counts.nonvague;
        if (preds[i] == golds[i]) ++counts.tp;
    }
    return counts;
}

std::string pct(double v) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(1);
    out << v * 100.0;
    return out.str();
}

}  // namespace

double micro_f1(const std::vector<Relation>& preds, const std::vector<Relation>& golds) {
    return micro_counts(preds, golds).f1();
}

ClassScores per_class_f1(const std::vector<Relation>& preds, const std::vector<Relation>& golds,
                         Relation c) {
    check_lengths(preds.size(), golds.size());
    ClassScores scores;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        bool gold_c = golds[i] == c;
        // Vague predictions are outside the label space: neither TP nor FP.
        bool pred_c = preds[i] == c && preds[i] != Relation::vague;
        if (gold_c) ++scores.support;
        if (pred_c && gold_c) ++scores.tp;
        if (pred_c && !gold_c) ++scores.fp;
        if (!pred_c && gold_c) ++scores.fn;
    }
    scores.absent_from_gold = scores.support == 0;
    if (scores.tp + scores.fp > 0)
        scores.precision = static_cast<double>(scores.tp) / static_cast<double>(scores.tp + scores.fp);
    if (scores.tp + scores.fn > 0)
        scores.recall = static_cast<double>(scores.tp) / static_cast<double>(scores.tp + scores.fn);
    if (scores.tp > 0)
        scores.f1 = 2.0 * scores.precision * scores.recall / (scores.precision + scores.recall);
    return scores;
}

std::pair<SliceScores, SliceScores> slice_intra_inter(const std::vector<Relation>& preds,
                                                      const std::vector<Relation>& golds,
                                                      const std::vector<Scope>& scopes) {
    check_lengths(preds.size(), golds.size());
    check_lengths(preds.size(), scopes.size());
    std::vector<Relation> preds_intra, golds_intra, preds_inter, golds_inter;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (scopes[i] == Scope::intra) {
            preds_intra.push_back(preds[i]);
            golds_intra.push_back(golds[i]);
        } else {
            preds_inter.push_back(preds[i]);
            golds_inter.push_back(golds[i]);
        }
    }
    auto make_slice = [total = preds.size()](const std::vector<Relation>& p,
                                             const std::vector<Relation>& g) {
        SliceScores slice;
        MicroCounts counts = micro_counts(p, g);
        slice.n = counts.n;
        slice.tp = counts.tp;
        slice.micro_f1 = counts.f1();
        slice.proportion = total == 0 ? 0.0 : static_cast<double>(counts.n) / total;
        slice.empty = counts.n == 0;
        return slice;
    };
    return {make_slice(preds_intra, golds_intra), make_slice(preds_inter, golds_inter)};
}

EvalReport evaluate(const std::vector<Relation>& preds, const std::vector<Relation>& golds,
                    const std::vector<Scope>& scopes, Scheme scheme) {
    EvalReport report;
    MicroCounts counts = micro_counts(preds, golds);
    report.n = counts.n;
    report.tp = counts.tp;
    report.n_nonvague_predictions = counts.nonvague;
    report.precision = counts.precision();
    report.recall = counts.recall();
    report.micro_f1 = counts.f1();
    for (Relation r : scheme_relations(scheme))
        report.per_class[relation_name(r)] = per_class_f1(preds, golds, r);
    auto [intra, inter] = slice_intra_inter(preds, golds, scopes);
    report.intra = intra;
    report.inter = inter;
    if (counts.n > 0)
        report.vague_rate =
            static_cast<double>(counts.n - counts.nonvague) / static_cast<double>(counts.n);
    return report;
}

RunAggregate aggregate_runs(const std::map<int, EvalReport>& per_set) {
    if (per_set.empty()) fail_input("aggregate_runs needs at least one report");
    RunAggregate agg;
    agg.per_set = per_set;
    double sum = 0.0;
    for (const auto& [id, report] : per_set) sum += report.micro_f1;
    agg.mean_micro_f1 = sum / static_cast<double>(per_set.size());
    double var = 0.0;
    for (const auto& [id, report] : per_set) {
        double d = report.micro_f1 - agg.mean_micro_f1;
        var += d * d;
    }
    agg.std_micro_f1 = std::sqrt(var / static_cast<double>(per_set.size()));
    return agg;
}

ErrorIntersection error_intersection(const std::vector<Relation>& preds_a,
                                     const std::vector<Relation>& preds_b,
                                     const std::vector<Relation>& golds,
                                     const std::vector<std::string>& pair_ids) {
    check_lengths(preds_a.size(), golds.size());
    check_lengths(preds_b.size(), golds.size());
    check_lengths(pair_ids.size(), golds.size());
    ErrorIntersection out;
    std::size_t a_errors = 0;
    for (std::size_t i = 0; i < golds.size(); ++i) {
        bool a_wrong = preds_a[i] != golds[i];
        bool b_right = preds_b[i] == golds[i];
        if (a_wrong) ++a_errors;
        if (a_wrong && b_right) out.pair_ids.push_back(pair_ids[i]);
    }
    if (a_errors > 0)
        out.fraction_of_a_errors =
            static_cast<double>(out.pair_ids.size()) / static_cast<double>(a_errors);
    if (!golds.empty())
        out.fraction_of_test_set =
            static_cast<double>(out.pair_ids.size()) / static_cast<double>(golds.size());
    return out;
}

namespace {

json report_to_json(const EvalReport& report) {
    json per_class;
    for (const auto& [name, scores] : report.per_class) {
        per_class[name] = {{"support", scores.support}, {"tp", scores.tp},
                           {"fp", scores.fp},           {"fn", scores.fn},
                           {"precision", scores.precision}, {"recall", scores.recall},
                           {"f1", scores.f1},           {"absent_from_gold", scores.absent_from_gold}};
    }
    auto slice = [](const SliceScores& s) {
        return json{{"n", s.n},
                    {"tp", s.tp},
                    {"micro_f1", s.micro_f1},
                    {"proportion", s.proportion},
                    {"empty", s.empty}};
    };
    return json{{"n", report.n},
                {"tp", report.tp},
                {"n_nonvague_predictions", report.n_nonvague_predictions},
                {"precision", report.precision},
                {"recall", report.recall},
                {"micro_f1", report.micro_f1},
                {"per_class", per_class},
                {"intra", slice(report.intra)},
                {"inter", slice(report.inter)},
                {"vague_rate", report.vague_rate},
                {"contradiction_rate", report.contradiction_rate}};
}

}  // namespace

std::string emit_report(const EvalReport& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::json:
            return report_to_json(report).dump(2) + "\n";
        case ReportFormat::csv: {
            std::ostringstream out;
            out << "class,support,tp,fp,fn,precision,recall,f1\n";
            for (const auto& [name, s] : report.per_class)
                out << name << "," << s.support << "," << s.tp << "," << s.fp << "," << s.fn << ","
                    << s.precision << "," << s.recall << "," << s.f1 << "\n";
            out << "micro," << report.n << "," << report.tp << ",,," << report.precision << ","
                << report.recall << "," << report.micro_f1 << "\n";
            return out.str();
        }
        case ReportFormat::markdown: {
            std::ostringstream out;
            out << "| Class | Support | P | R | F1 |\n|---|---|---|---|---|\n";
            for (const auto& [name, s] : report.per_class)
                out << "| " << name << " | " << s.support << " | " << pct(s.precision) << " | "
                    << pct(s.recall) << " | " << pct(s.f1) << " |\n";
            out << "| micro | " << report.n << " | " << pct(report.precision) << " | "
                << pct(report.recall) << " | " << pct(report.micro_f1) << " |\n";
            return out.str();
        }
    }
    fail_input("unknown report format");
}

std::string emit_aggregate(const RunAggregate& aggregate, const std::string& model,
                           const std::string& protocol, ReportFormat format) {
    switch (format) {
        case ReportFormat::json: {
            json sets;
            for (const auto& [id, report] : aggregate.per_set)
                sets[std::to_string(id)] = report_to_json(report);
            json out = {{"per_set", sets},
                        {"mean_micro_f1", aggregate.mean_micro_f1},
                        {"std_micro_f1", aggregate.std_micro_f1},
                        {"model", model},
                        {"protocol", protocol}};
            return out.dump(2) + "\n";
        }
        case ReportFormat::csv: {
            std::ostringstream out;
            out << "model,protocol,set_id,micro_f1,vague_rate,contradiction_rate\n";
            for (const auto& [id, report] : aggregate.per_set)
                out << model << "," << protocol << "," << id << "," << report.micro_f1 << ","
                    << report.vague_rate << "," << report.contradiction_rate << "\n";
            out << model << "," << protocol << ",mean," << aggregate.mean_micro_f1 << ",,\n";
            out << model << "," << protocol << ",std," << aggregate.std_micro_f1 << ",,\n";
            return out.str();
        }
        case ReportFormat::markdown: {
            std::ostringstream out;
            out << "| Model | Protocol | Micro-F1 (mean) | Std |\n|---|---|---|---|\n";
            out << "| " << model << " | " << protocol << " | " << pct(aggregate.mean_micro_f1)
                << " | " << pct(aggregate.std_micro_f1) << " |\n";
            return out.str();
        }
    }
    fail_input("unknown report format");
}

}  // namespace trc
