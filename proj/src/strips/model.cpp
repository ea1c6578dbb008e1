#include "planshape/strips/model.hpp"

#include <sstream>

namespace planshape::strips {

std::string Fluent::str() const {
    std::ostringstream out;
    out << '(' << predicate;
    for (const auto& a : args) out << ' ' << a;
    out << ')';
    return out.str();
}

FluentSet::FluentSet(std::vector<Fluent> fluents) : items_(std::move(fluents)) {
    std::sort(items_.begin(), items_.end());
    items_.erase(std::unique(items_.begin(), items_.end()), items_.end());
}

bool FluentSet::contains_all(const FluentSet& other) const {
    return std::includes(items_.begin(), items_.end(), other.items_.begin(), other.items_.end());
}

void FluentSet::insert(const Fluent& f) {
    auto it = std::lower_bound(items_.begin(), items_.end(), f);
    if (it == items_.end() || *it != f) items_.insert(it, f);
}

void FluentSet::erase(const Fluent& f) {
    auto it = std::lower_bound(items_.begin(), items_.end(), f);
    if (it != items_.end() && *it == f) items_.erase(it);
}

std::string FluentSet::str() const {
    std::ostringstream out;
    out << '{';
    for (std::size_t i = 0; i < items_.size(); ++i) {
        if (i) out << ", ";
        out << items_[i].str();
    }
    out << '}';
    return out.str();
}

const PredicateDecl* Domain::find_predicate(const std::string& name) const {
    for (const auto& p : predicates) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

const ActionSchema* Domain::find_action(const std::string& name) const {
    for (const auto& a : actions) {
        if (a.name == name) return &a;
    }
    return nullptr;
}

std::string GroundAction::str() const {
    std::ostringstream out;
    out << '(' << name;
    for (const auto& o : objects) out << ' ' << o;
    out << ')';
    return out.str();
}

namespace {

void print_typed_list(std::ostringstream& out, const std::vector<Parameter>& params) {
    for (const auto& p : params) out << ' ' << p.name << " - " << p.type;
}

void print_literal(std::ostringstream& out, const Literal& lit) {
    if (!lit.positive) out << "(not ";
    out << '(' << lit.predicate;
    for (const auto& a : lit.args) out << ' ' << a;
    out << ')';
    if (!lit.positive) out << ')';
}

}  // namespace

std::string print_domain(const Domain& d) {
    std::ostringstream out;
    out << "(define (domain " << d.name << ")\n";
    if (!d.requirements.empty()) {
        out << "    (:requirements";
        for (const auto& r : d.requirements) out << ' ' << r;
        out << ")\n";
    }
    if (!d.types.empty()) {
        out << "    (:types";
        for (const auto& t : d.types) out << ' ' << t.name << " - " << t.supertype;
        out << ")\n";
    }
    out << "    (:predicates";
    for (const auto& p : d.predicates) {
        out << " (" << p.name;
        print_typed_list(out, p.params);
        out << ')';
    }
    out << ")\n";
    for (const auto& a : d.actions) {
        out << "    (:action " << a.name << "\n        :parameters (";
        for (std::size_t i = 0; i < a.params.size(); ++i) {
            if (i) out << ' ';
            out << a.params[i].name << " - " << a.params[i].type;
        }
        out << ")\n        :precondition (and";
        for (const auto& lit : a.preconditions) {
            out << ' ';
            print_literal(out, lit);
        }
        out << ")\n        :effect (and";
        for (const auto& f : a.add) out << ' ' << f.str();
        for (const auto& f : a.del) out << " (not " << f.str() << ')';
        out << "))\n";
    }
    out << ")\n";
    return out.str();
}

std::string print_problem(const StripsProblem& p) {
    std::ostringstream out;
    out << "(define (problem " << p.name << ")\n    (:domain " << p.domain_name << ")\n";
    out << "    (:objects";
    for (const auto& o : p.objects) out << ' ' << o.name << " - " << o.type;
    out << ")\n    (:init";
    for (const auto& f : p.init) out << ' ' << f.str();
    out << ")\n    (:goal (and";
    for (const auto& f : p.goal) out << ' ' << f.str();
    out << "))\n)\n";
    return out.str();
}

}  // namespace planshape::strips
