#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vidmod {

// Hierarchical violation label tree: major category -> sub-category -> rules.
// Identifiers are lowercase snake-case slugs; display names are free text.

struct SubCategory {
    std::string id;
    std::string name;
    std::vector<std::string> rules;
};

struct MajorCategory {
    std::string id;
    std::string name;
    std::vector<SubCategory> subs;
};

struct LabelTree {
    std::vector<MajorCategory> majors;

    const MajorCategory* find_major(const std::string& major_id) const;
    std::optional<SubCategory> lookup(const std::string& major_id,
                                      const std::string& sub_id) const;
};

class TaxonomyError : public std::runtime_error {
  public:
    explicit TaxonomyError(const std::string& what) : std::runtime_error(what) {}
};

// Parses and validates a taxonomy JSON file.
// Throws TaxonomyError on parse errors (with line/position), duplicate ids,
// empty major lists, or sub-categories without rules.
LabelTree load_taxonomy(const std::string& path);

// Same validation, from an in-memory JSON string.
LabelTree parse_taxonomy(const std::string& json_text);

// Six-major fixture used by tests, corpus generation, and the CLI when no
// taxonomy file is supplied.
const std::string& builtin_taxonomy_json();
const LabelTree& builtin_taxonomy();

}  // namespace vidmod
