#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "planshape/strips/model.hpp"

namespace planshape::strips {

// Raised for any lexical, syntactic, or declaration error. Unsupported
// constructs are rejected, never skipped.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, int line, int column);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

// Supported subset: :strips, :typing, :negative-preconditions requirements,
// and/not connectives, typed parameter and object lists.
Domain parse_domain(std::string_view text);

StripsProblem parse_problem(std::string_view text, const Domain& domain);

}  // namespace planshape::strips
