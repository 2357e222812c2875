#pragma once

// Text descriptors for distributions:
//
//   base      := name '(' [ param '=' number { ',' param '=' number } ] ')'
//   extended  := ('lehmann1' | 'lehmann2')
//                '(' 'base' '=' base ',' 'lambda' '=' number ')'
//
// e.g. "exponential(rate=1.5)", "lehmann2(base=weibull(shape=2,scale=1),
// lambda=3)". Arguments may appear in any order; whitespace is ignored.
// Errors are reported as ParseError with the byte offset of the problem.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lehmann/base_dist.hpp"
#include "lehmann/errors.hpp"
#include "lehmann/extended.hpp"

namespace lehmann {

namespace detail {

struct DescriptorNode;

struct DescriptorArg {
  std::string key;
  std::size_t key_pos = 0;
  std::size_t value_pos = 0;
  std::variant<double, std::shared_ptr<DescriptorNode>> value;
};

struct DescriptorNode {
  std::string name;
  std::size_t pos = 0;
  std::vector<DescriptorArg> args;
};

class DescriptorParser {
 public:
  explicit DescriptorParser(std::string_view text) : text_(text) {}

  DescriptorNode parse() {
    DescriptorNode node = parse_node();
    skip_ws();
    if (pos_ != text_.size()) fail({"end of input"});
    return node;
  }

 private:
  DescriptorNode parse_node() {
    skip_ws();
    DescriptorNode node;
    node.pos = pos_;
    node.name = parse_ident("distribution name");
    expect('(');
    skip_ws();
    if (peek() == ')') {
      ++pos_;
      return node;
    }
    while (true) {
      skip_ws();
      DescriptorArg arg;
      arg.key_pos = pos_;
      arg.key = parse_ident("parameter name");
      expect('=');
      skip_ws();
      arg.value_pos = pos_;
      if (std::isalpha(static_cast<unsigned char>(peek()))) {
        arg.value = std::make_shared<DescriptorNode>(parse_node());
      } else {
        arg.value = parse_number();
      }
      node.args.push_back(std::move(arg));
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      if (peek() == ')') {
        ++pos_;
        return node;
      }
      fail({"','", "')'"});
    }
  }

  std::string parse_ident(const char* what) {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_')) {
      ++pos_;
    }
    if (pos_ == start || std::isdigit(static_cast<unsigned char>(text_[start]))) {
      pos_ = start;
      fail({what});
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  double parse_number() {
    const std::size_t start = pos_;
    std::size_t end = pos_;
    while (end < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[end])) ||
            text_[end] == '.' || text_[end] == 'e' || text_[end] == 'E' ||
            text_[end] == '+' || text_[end] == '-')) {
      ++end;
    }
    std::size_t first = start;
    if (first < end && text_[first] == '+') ++first;
    double value = 0.0;
    const auto [ptr, ec] =
        std::from_chars(text_.data() + first, text_.data() + end, value);
    if (ec != std::errc{} || ptr != text_.data() + end || first == end ||
        !std::isfinite(value)) {
      fail({"number", "distribution"});
    }
    pos_ = end;
    return value;
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) fail({std::string("'") + c + "'"});
    ++pos_;
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    std::string found;
    if (pos_ < text_.size()) found = std::string(1, text_[pos_]);
    throw ParseError(pos_, std::move(expected), found);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

[[noreturn]] inline void semantic_error(std::size_t pos, std::string expected,
                                        std::string found) {
  throw ParseError(pos, {std::move(expected)}, found);
}

inline BaseDistribution build_base(const DescriptorNode& node,
                                   const FamilyRegistry& registry) {
  const auto family = registry.find(node.name);
  if (!family) {
    std::string known;
    for (const auto& n : registry.names()) {
      known += (known.empty() ? "" : "|") + n;
    }
    semantic_error(node.pos, "a registered family (" + known + ")", node.name);
  }
  const auto names = family->parameter_names();
  std::vector<double> theta(names.size());
  std::vector<bool> seen(names.size(), false);
  for (const auto& arg : node.args) {
    std::size_t idx = names.size();
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == arg.key) idx = i;
    }
    if (idx == names.size()) {
      std::string allowed;
      for (const auto& n : names) allowed += (allowed.empty() ? "" : "|") + n;
      semantic_error(arg.key_pos,
                     allowed.empty() ? "')' (" + node.name + " takes no parameters)"
                                     : "a parameter of " + node.name + " (" + allowed + ")",
                     arg.key);
    }
    if (seen[idx]) semantic_error(arg.key_pos, "a parameter not yet given", arg.key);
    if (!std::holds_alternative<double>(arg.value)) {
      semantic_error(arg.value_pos, "number", "distribution");
    }
    theta[idx] = std::get<double>(arg.value);
    seen[idx] = true;
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!seen[i]) semantic_error(node.pos, "parameter '" + names[i] + "'", node.name);
  }
  try {
    return BaseDistribution(family, std::move(theta));
  } catch (const DomainError& e) {
    semantic_error(node.pos, "valid parameters (" + std::string(e.what()) + ")",
                   node.name);
  }
}

inline bool is_extended_name(std::string_view name) {
  return name == "lehmann1" || name == "lehmann2";
}

inline ExtendedDistribution build_extended(const DescriptorNode& node,
                                           const FamilyRegistry& registry) {
  const Alternative kind =
      node.name == "lehmann1" ? Alternative::First : Alternative::Second;
  const DescriptorNode* base = nullptr;
  double lambda = 0.0;
  bool have_lambda = false;
  for (const auto& arg : node.args) {
    if (arg.key == "base") {
      if (base) semantic_error(arg.key_pos, "a parameter not yet given", arg.key);
      const auto* sub = std::get_if<std::shared_ptr<DescriptorNode>>(&arg.value);
      if (!sub) semantic_error(arg.value_pos, "distribution", "number");
      base = sub->get();
    } else if (arg.key == "lambda") {
      if (have_lambda) semantic_error(arg.key_pos, "a parameter not yet given", arg.key);
      const auto* v = std::get_if<double>(&arg.value);
      if (!v) semantic_error(arg.value_pos, "number", "distribution");
      if (!(*v > 0.0)) semantic_error(arg.value_pos, "lambda > 0", format_double(*v));
      lambda = *v;
      have_lambda = true;
    } else {
      semantic_error(arg.key_pos, "'base' or 'lambda'", arg.key);
    }
  }
  if (!base) semantic_error(node.pos, "parameter 'base'", node.name);
  if (!have_lambda) semantic_error(node.pos, "parameter 'lambda'", node.name);
  if (is_extended_name(base->name)) {
    semantic_error(base->pos, "a base family", base->name);
  }
  return ExtendedDistribution(build_base(*base, registry), lambda, kind);
}

}  // namespace detail

inline BaseDistribution parse_base_descriptor(
    std::string_view text,
    const FamilyRegistry& registry = FamilyRegistry::global()) {
  const auto node = detail::DescriptorParser(text).parse();
  if (detail::is_extended_name(node.name)) {
    detail::semantic_error(node.pos, "a base family", node.name);
  }
  return detail::build_base(node, registry);
}

inline ExtendedDistribution parse_extended_descriptor(
    std::string_view text,
    const FamilyRegistry& registry = FamilyRegistry::global()) {
  const auto node = detail::DescriptorParser(text).parse();
  if (!detail::is_extended_name(node.name)) {
    detail::semantic_error(node.pos, "'lehmann1' or 'lehmann2'", node.name);
  }
  return detail::build_extended(node, registry);
}

// Accepts either form; a bare base descriptor becomes the extension with
// the given default exponent and kind.
inline ExtendedDistribution parse_distribution(
    std::string_view text, double default_lambda = 1.0,
    Alternative default_kind = Alternative::First,
    const FamilyRegistry& registry = FamilyRegistry::global()) {
  const auto node = detail::DescriptorParser(text).parse();
  if (detail::is_extended_name(node.name)) {
    return detail::build_extended(node, registry);
  }
  return ExtendedDistribution(detail::build_base(node, registry),
                              default_lambda, default_kind);
}

}  // namespace lehmann
