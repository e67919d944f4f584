#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace trc {

// `vague` is never a gold label after ingestion; it is the catch-all bucket
// for unparseable or contradictory model outputs.
enum class Relation { before, after, equal, includes, is_included, vague };

enum class Scheme { matres, tbdense };

// Canonical lowercase name ("is_included").
std::string relation_name(Relation r);

// Surface form used in prompts: uppercase, underscores as spaces ("IS INCLUDED").
std::string relation_label(Relation r);

// Case-insensitive; accepts "is included" and "is_included". Does not map
// "simultaneous" (that is a scheme-level ingestion rule).
std::optional<Relation> parse_relation(std::string_view name);

std::optional<Scheme> parse_scheme(std::string_view name);
std::string scheme_name(Scheme s);

// Non-vague relations of the scheme, in declaration order
// (before, after, equal[, includes, is_included]).
const std::vector<Relation>& scheme_relations(Scheme s);

// Fixed question order for QA prompts: after, before, equal, includes, is_included.
const std::vector<Relation>& question_order(Scheme s);

// Alphabetical class order used for classifier checkpoints.
std::vector<Relation> class_order(Scheme s);

// before <-> after, includes <-> is_included, equal -> equal. Errors on vague.
Relation invert_relation(Relation r);

}  // namespace trc
