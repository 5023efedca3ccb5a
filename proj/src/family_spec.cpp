#include "psiest/family_spec.hpp"

#include <cctype>
#include <set>

#include "psiest/errors.hpp"

namespace psiest {

std::optional<std::string> Descriptor::get(std::string_view key) const {
  for (const auto& [k, v] : args) {
    if (k == key) return v;
  }
  return std::nullopt;
}

namespace {

class DescriptorLexer {
 public:
  explicit DescriptorLexer(std::string_view s) : s_(s) {}

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool done() {
    skip_ws();
    return pos_ >= s_.size();
  }
  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  bool accept(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }
  std::string name() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '-' ||
            s_[pos_] == '_')) {
      ++pos_;
    }
    if (pos_ == start) fail("expected a name");
    return std::string(s_.substr(start, pos_ - start));
  }
  std::string value() {
    skip_ws();
    if (pos_ >= s_.size()) fail("expected a value");
    const char c = s_[pos_];
    if (c == '"') return quoted();
    if (c == '(' || c == '[') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && s_[pos_] != ')' && s_[pos_] != ']') ++pos_;
      if (pos_ >= s_.size()) fail("unterminated interval");
      ++pos_;
      return std::string(s_.substr(start, pos_ - start));
    }
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ')') ++pos_;
    std::string v(s_.substr(start, pos_ - start));
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.pop_back();
    if (v.empty()) fail("empty value");
    return v;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw DescriptorError("bad descriptor '" + std::string(s_) + "': " + what + " at offset " +
                          std::to_string(pos_));
  }

 private:
  std::string quoted() {
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
      out += s_[pos_++];
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

double number_arg(const Descriptor& d, std::string_view key, double fallback) {
  const auto v = d.get(key);
  if (!v) return fallback;
  try {
    return parse_real(*v);
  } catch (const DomainError&) {
    throw DescriptorError(d.name + ": " + std::string(key) + " must be a number, got '" + *v + "'");
  }
}

std::string required(const Descriptor& d, std::string_view key) {
  const auto v = d.get(key);
  if (!v) throw DescriptorError(d.name + " requires " + std::string(key) + "=...");
  return *v;
}

void only_keys(const Descriptor& d, std::set<std::string_view> allowed) {
  for (const auto& [k, v] : d.args) {
    if (!allowed.contains(k)) throw DescriptorError(d.name + " does not take '" + k + "'");
  }
}

}  // namespace

Descriptor parse_descriptor(std::string_view text) {
  DescriptorLexer lex(text);
  Descriptor d;
  d.name = lex.name();
  if (lex.accept('(')) {
    if (!lex.accept(')')) {
      do {
        std::string key = lex.name();
        lex.expect('=');
        d.args.emplace_back(std::move(key), lex.value());
      } while (lex.accept(','));
      lex.expect(')');
    }
  }
  if (!lex.done()) lex.fail("trailing text");
  return d;
}

Interval parse_interval(std::string_view text) {
  std::string s(text);
  auto trim = [](std::string v) {
    const auto b = v.find_first_not_of(" \t");
    const auto e = v.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
  };
  s = trim(s);
  if (s.size() < 5 || (s.front() != '(' && s.front() != '[') ||
      (s.back() != ')' && s.back() != ']')) {
    throw DescriptorError("bad interval '" + s + "'; expected (a,b) or [a,b]");
  }
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw DescriptorError("bad interval '" + s + "'; missing ','");
  try {
    const double lo = parse_real(trim(s.substr(1, comma - 1)));
    const double hi = parse_real(trim(s.substr(comma + 1, s.size() - comma - 2)));
    if (!(lo < hi)) throw DescriptorError("interval '" + s + "' must have lo < hi");
    return Interval(lo, hi, s.front() == '[', s.back() == ']');
  } catch (const DomainError& e) {
    throw DescriptorError("bad interval '" + s + "': " + e.what());
  }
}

FamilySpec parse_family_spec(std::string_view text) {
  const Descriptor d = parse_descriptor(text);
  if (d.name == "normal") {
    only_keys(d, {"sigma"});
    return normal_location(number_arg(d, "sigma", 1.0));
  }
  if (d.name == "alpha-density") {
    only_keys(d, {});
    return alpha_density();
  }
  if (d.name == "sign") {
    only_keys(d, {});
    return sign_location();
  }
  if (d.name == "sqrt-mean") {
    only_keys(d, {});
    return sqrt_mean();
  }
  if (d.name == "quasi-arith") {
    only_keys(d, {"f", "domain"});
    const auto dom = d.get("domain");
    return quasi_arithmetic(required(d, "f"), dom ? parse_interval(*dom) : Interval::real_line());
  }
  if (d.name == "expr") {
    only_keys(d, {"psi", "theta", "x-domain", "continuous"});
    const auto theta_text = d.get("theta");
    const Interval theta_iv = theta_text ? parse_interval(*theta_text) : Interval::real_line();
    const auto xdom = d.get("x-domain");
    std::optional<bool> continuous;
    if (const auto c = d.get("continuous")) {
      if (*c == "true") {
        continuous = true;
      } else if (*c == "false") {
        continuous = false;
      } else {
        throw DescriptorError("continuous must be true or false");
      }
    }
    return user_expression(required(d, "psi"), ParameterDomain(theta_iv.lo(), theta_iv.hi()),
                           xdom ? parse_interval(*xdom) : Interval::real_line(), continuous);
  }
  throw DescriptorError("unknown psi family '" + d.name +
                        "' (expected normal, alpha-density, sign, sqrt-mean, quasi-arith, expr)");
}

std::optional<ReferenceEstimator> parse_reference(std::string_view text) {
  if (text == "kappa") return ReferenceEstimator{ReferenceKind::Kappa};
  if (text == "max") return ReferenceEstimator{ReferenceKind::Max};
  if (text == "mid-range") return ReferenceEstimator{ReferenceKind::MidRange};
  return std::nullopt;
}

}  // namespace psiest
