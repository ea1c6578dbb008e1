#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace planshape::strips {

// Ground atom: predicate applied to object names. Args empty for 0-ary fluents.
struct Fluent {
    std::string predicate;
    std::vector<std::string> args;

    bool operator==(const Fluent& o) const = default;
    bool operator<(const Fluent& o) const {
        if (predicate != o.predicate) return predicate < o.predicate;
        return args < o.args;
    }

    std::string str() const;
};

// Set of ground fluents kept as a sorted, duplicate-free vector so that
// equality is order-independent and iteration order is canonical.
class FluentSet {
public:
    FluentSet() = default;
    explicit FluentSet(std::vector<Fluent> fluents);
    FluentSet(std::initializer_list<Fluent> fluents)
        : FluentSet(std::vector<Fluent>(fluents)) {}

    bool contains(const Fluent& f) const {
        return std::binary_search(items_.begin(), items_.end(), f);
    }
    bool contains_all(const FluentSet& other) const;

    void insert(const Fluent& f);
    void erase(const Fluent& f);

    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }
    const std::vector<Fluent>& items() const { return items_; }

    bool operator==(const FluentSet& o) const = default;
    bool operator<(const FluentSet& o) const { return items_ < o.items_; }

    std::string str() const;

private:
    std::vector<Fluent> items_;
};

struct Literal {
    bool positive = true;
    std::string predicate;
    std::vector<std::string> args;  // parameter names (lifted) or objects (ground)

    bool operator==(const Literal& o) const = default;
};

struct Parameter {
    std::string name;  // includes the leading '?'
    std::string type;

    bool operator==(const Parameter& o) const = default;
};

struct PredicateDecl {
    std::string name;
    std::vector<Parameter> params;

    bool operator==(const PredicateDecl& o) const = default;
};

struct ActionSchema {
    std::string name;
    std::vector<Parameter> params;
    std::vector<Literal> preconditions;  // positive and negative
    std::vector<Fluent> add;             // lifted: args are parameter names
    std::vector<Fluent> del;

    bool operator==(const ActionSchema& o) const = default;
};

struct TypeDecl {
    std::string name;
    std::string supertype;

    bool operator==(const TypeDecl& o) const = default;
};

struct Domain {
    std::string name;
    std::vector<std::string> requirements;
    std::vector<TypeDecl> types;
    std::vector<PredicateDecl> predicates;
    std::vector<ActionSchema> actions;

    const PredicateDecl* find_predicate(const std::string& name) const;
    const ActionSchema* find_action(const std::string& name) const;

    bool operator==(const Domain& o) const = default;
};

struct TypedObject {
    std::string name;
    std::string type;

    bool operator==(const TypedObject& o) const = default;
};

struct StripsProblem {
    std::string name;
    std::string domain_name;
    std::vector<TypedObject> objects;
    FluentSet init;
    FluentSet goal;  // positive conjunction only

    bool operator==(const StripsProblem& o) const = default;
};

// Schema instantiated with concrete objects; literal sets fully ground.
struct GroundAction {
    std::string name;
    std::vector<std::string> objects;
    std::vector<Literal> preconditions;
    FluentSet add;
    FluentSet del;

    // "(name obj0 obj1)" — the wire syntax used in prompts and plan files.
    std::string str() const;

    bool operator==(const GroundAction& o) const = default;
};

struct ValidationResult {
    std::size_t valid_prefix_len = 0;
    bool goal_reached = false;
    struct Failure {
        std::size_t step;          // index of the first inapplicable action
        std::string unsatisfied;   // literal that blocked it, printed form
    };
    std::optional<Failure> failure;
};

// Canonical PDDL rendering of a parsed model; parsing the output again yields
// an equal model.
std::string print_domain(const Domain& d);
std::string print_problem(const StripsProblem& p);

}  // namespace planshape::strips
