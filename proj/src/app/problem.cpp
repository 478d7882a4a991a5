#include "problem.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace kjet::app {

namespace {

struct Entry {
  int line;
  std::string value;
  bool quoted;
};

[[noreturn]] void fail(int line, const std::string& what) {
  throw Error(ErrorCode::syntax, "line " + std::to_string(line) + ": " + what);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Splits on commas at parenthesis depth zero.
std::vector<std::string> split_top(std::string_view s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == sep && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

double to_double(const std::string& s, int line) {
  const char* begin = s.c_str();
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(begin, &end);
  if (s.empty() || end != begin + s.size() || errno == ERANGE) fail(line, "expected a number, got '" + s + "'");
  return v;
}

long long to_integer(const std::string& s, int line) {
  const char* begin = s.c_str();
  char* end = nullptr;
  errno = 0;
  long long v = std::strtoll(begin, &end, 10);
  if (s.empty() || end != begin + s.size() || errno == ERANGE) fail(line, "expected an integer, got '" + s + "'");
  return v;
}

Entry parse_value(const std::string& raw, int line) {
  std::string v = trim(raw);
  if (!v.empty() && v.front() == '"') {
    const auto close = v.find('"', 1);
    if (close == std::string::npos) fail(line, "unterminated string");
    std::string rest = trim(std::string_view(v).substr(close + 1));
    if (!rest.empty() && rest.front() != '#') fail(line, "unexpected text after string");
    return {line, v.substr(1, close - 1), true};
  }
  const auto hash = v.find('#');
  if (hash != std::string::npos) v = trim(std::string_view(v).substr(0, hash));
  if (v.empty()) fail(line, "missing value");
  return {line, v, false};
}

std::pair<double, double> parse_interval(const Entry& e) {
  const std::string& v = e.value;
  if (e.quoted || v.size() < 2 || v.front() != '[' || v.back() != ']') fail(e.line, "expected [lo, hi]");
  auto parts = split_top(std::string_view(v).substr(1, v.size() - 2), ',');
  if (parts.size() != 2) fail(e.line, "expected [lo, hi]");
  double lo = to_double(parts[0], e.line), hi = to_double(parts[1], e.line);
  if (!(lo <= hi)) fail(e.line, "empty interval");
  return {lo, hi};
}

std::vector<Expr> parse_list(const Entry& e, const Context& ctx) {
  std::vector<Expr> out;
  for (const auto& part : split_top(e.value, ',')) {
    try {
      out.push_back(parse_expr(part, ctx));
    } catch (const Error& err) {
      fail(e.line, "'" + part + "': " + err.what());
    }
  }
  return out;
}

bool parse_bool(const Entry& e) {
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  fail(e.line, "expected true or false");
}

}  // namespace

double Problem::tolerance(const std::string& check, double fallback) const {
  auto it = tolerances.find(check);
  return it == tolerances.end() ? fallback : it->second;
}

LagrangianSpec Problem::lagrangian_spec() const {
  if (!lagrangian) throw Error(ErrorCode::precondition, "problem has no lagrangian");
  return {ctx, *lagrangian, finsler, domain};
}

std::vector<PhasePoint> Problem::sample(int count) const { return sample_points(ctx, domain, count, seed); }

Problem parse_problem(std::string_view text) {
  std::map<std::string, Entry> entries;
  std::vector<std::string> chart_order;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) fail(number, "expected key = value");
    std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) fail(number, "missing key");
    if (entries.count(key)) fail(number, "duplicate key '" + key + "'");
    entries.emplace(key, parse_value(t.substr(eq + 1), number));
    if (key.rfind("chart.", 0) == 0) chart_order.push_back(key);
  }

  auto take = [&](const std::string& key) -> std::optional<Entry> {
    auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    Entry e = it->second;
    entries.erase(it);
    return e;
  };
  auto dimension = [&](const char* key) {
    auto e = take(key);
    if (!e) throw Error(ErrorCode::syntax, std::string("missing required key '") + key + "'");
    long long v = to_integer(e->value, e->line);
    if (v < 1 || v > 16) fail(e->line, std::string(key) + " must be between 1 and 16");
    return static_cast<int>(v);
  };

  const int n = dimension("n");
  const int k = dimension("k");
  Problem p;
  p.text = std::string(text);
  p.ctx = Context(n, k);
  p.domain = Box::uniform(p.ctx, -1.0, 1.0);

  if (auto e = take("lagrangian")) {
    auto list = parse_list(*e, p.ctx);
    if (list.size() != 1) fail(e->line, "lagrangian must be a single expression");
    p.lagrangian = list.front();
  }
  if (auto e = take("finsler")) p.finsler = parse_bool(*e);
  if (auto e = take("semispray")) {
    auto list = parse_list(*e, p.ctx);
    if (list.size() != static_cast<std::size_t>(n)) fail(e->line, "semispray needs " + std::to_string(n) + " coefficients");
    p.semispray = std::move(list);
  }
  if (!p.lagrangian && !p.semispray) throw Error(ErrorCode::syntax, "problem needs a lagrangian or a semispray");
  if (p.finsler && !p.lagrangian) throw Error(ErrorCode::syntax, "finsler = true needs a lagrangian");

  for (const auto& key : chart_order) {
    Entry e = *take(key);
    std::string name = key.substr(6);
    if (name.empty()) fail(e.line, "chart needs a name");
    try {
      p.charts.push_back({name, ChartMap(p.ctx, parse_list(e, p.ctx))});
    } catch (const Error& err) {
      if (err.code() == ErrorCode::syntax) throw;
      fail(e.line, err.what());
    }
  }

  if (auto e = take("domain.x")) p.domain.levels[0] = parse_interval(*e);
  for (int m = 1; m <= k; ++m) {
    if (auto e = take("domain.y" + std::to_string(m))) p.domain.levels[static_cast<std::size_t>(m)] = parse_interval(*e);
  }
  if (auto e = take("seed")) {
    long long v = to_integer(e->value, e->line);
    if (v < 0) fail(e->line, "seed must be nonnegative");
    p.seed = static_cast<std::uint64_t>(v);
  }
  if (auto e = take("samples")) {
    long long v = to_integer(e->value, e->line);
    if (v < 1 || v > 100000) fail(e->line, "samples must be between 1 and 100000");
    p.samples = static_cast<int>(v);
  }
  if (auto e = take("expect_fail")) {
    for (const auto& name : split_top(e->value, ',')) {
      if (!name.empty()) p.expect_fail.insert(name);
    }
  }
  if (auto e = take("init")) {
    try {
      p.init = parse_state(e->value, p.ctx);
    } catch (const Error& err) {
      fail(e->line, err.what());
    }
  }
  for (auto it = entries.begin(); it != entries.end();) {
    if (it->first.rfind("tolerance.", 0) == 0 && it->first.size() > 10) {
      double v = to_double(it->second.value, it->second.line);
      if (!(v >= 0.0)) fail(it->second.line, "tolerance must be nonnegative");
      p.tolerances[it->first.substr(10)] = v;
      it = entries.erase(it);
    } else {
      ++it;
    }
  }
  if (!entries.empty()) {
    const auto& [key, e] = *std::min_element(entries.begin(), entries.end(),
                                             [](const auto& a, const auto& b) { return a.second.line < b.second.line; });
    fail(e.line, "unknown key '" + key + "'");
  }
  return p;
}

Problem load_problem(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::io, "cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_problem(ss.str());
}

PhasePoint parse_state(std::string_view text, const Context& ctx) {
  std::string s(text);
  for (char& c : s) {
    if (c == ',') c = ';';
  }
  std::vector<double> values;
  for (const auto& part : split_top(s, ';')) {
    const char* begin = part.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (part.empty() || end != begin + part.size()) throw Error(ErrorCode::usage, "malformed state value '" + part + "'");
    values.push_back(v);
  }
  if (values.size() != static_cast<std::size_t>(ctx.dim())) {
    throw Error(ErrorCode::usage, "state needs " + std::to_string(ctx.dim()) + " values, got " + std::to_string(values.size()));
  }
  return PhasePoint::from_flat(ctx, values);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::io, "sha256 failed");
  }
  std::string out;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    out += buf;
  }
  return out;
}

}  // namespace kjet::app
