#pragma once

#include <string>
#include <string_view>

#include "confgap/errors.hpp"
#include "confgap/field.hpp"

namespace confgap {

class ParseError : public Error {
public:
    using Error::Error;
};

/// Parses a scalar expression in the chart coordinates x1, x2.
///
/// Grammar: + - * / ^ (right associative), unary minus, parentheses,
/// numeric literals, the constants pi and e, and the functions exp, log and
/// sqrt. The returned field carries exact derivatives and keeps the source
/// text as its description.
ScalarField parse_expression(std::string_view text);

}  // namespace confgap
