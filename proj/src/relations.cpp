#include "trc/relations.hpp"

#include <algorithm>

#include "trc/util.hpp"

namespace trc {

std::string relation_name(Relation r) {
    switch (r) {
        case Relation::before: return "before";
        case Relation::after: return "after";
        case Relation::equal: return "equal";
        case Relation::includes: return "includes";
        case Relation::is_included: return "is_included";
        case Relation::vague: return "vague";
    }
    fail_internal("bad Relation value");
}

std::string relation_label(Relation r) {
    std::string name = relation_name(r);
    for (char& c : name) {
        if (c == '_') c = ' ';
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return name;
}

std::optional<Relation> parse_relation(std::string_view name) {
    std::string n = lowercase(name);
    std::replace(n.begin(), n.end(), ' ', '_');
    if (n == "before") return Relation::before;
    if (n == "after") return Relation::after;
    if (n == "equal") return Relation::equal;
    if (n == "includes") return Relation::includes;
    if (n == "is_included") return Relation::is_included;
    if (n == "vague") return Relation::vague;
    return std::nullopt;
}

std::optional<Scheme> parse_scheme(std::string_view name) {
    std::string n = lowercase(name);
    if (n == "matres") return Scheme::matres;
    if (n == "tbdense" || n == "tb-dense" || n == "tb_dense") return Scheme::tbdense;
    return std::nullopt;
}

std::string scheme_name(Scheme s) {
    return s == Scheme::matres ? "matres" : "tbdense";
}

const std::vector<Relation>& scheme_relations(Scheme s) {
    static const std::vector<Relation> matres = {Relation::before, Relation::after, Relation::equal};
    static const std::vector<Relation> tbdense = {Relation::before, Relation::after, Relation::equal,
                                                  Relation::includes, Relation::is_included};
    return s == Scheme::matres ? matres : tbdense;
}

const std::vector<Relation>& question_order(Scheme s) {
    static const std::vector<Relation> matres = {Relation::after, Relation::before, Relation::equal};
    static const std::vector<Relation> tbdense = {Relation::after, Relation::before, Relation::equal,
                                                  Relation::includes, Relation::is_included};
    return s == Scheme::matres ? matres : tbdense;
}

std::vector<Relation> class_order(Scheme s) {
    std::vector<Relation> order = scheme_relations(s);
    std::sort(order.begin(), order.end(),
              [](Relation a, Relation b) { return relation_name(a) < relation_name(b); });
    return order;
}

Relation invert_relation(Relation r) {
    switch (r) {
        case Relation::before: return Relation::after;
        case Relation::after: return Relation::before;
        case Relation::includes: return Relation::is_included;
        case Relation::is_included: return Relation::includes;
        case Relation::equal: return Relation::equal;
        case Relation::vague: fail_input("vague has no defined inverse");
    }
    fail_internal("bad Relation value");
}

}  // namespace trc
