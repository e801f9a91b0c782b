#include "ropo/model_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cctype>
#include <iterator>
#include <optional>
#include <sstream>

namespace ropo {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + message),
      line_(line),
      column_(column) {}

std::string format_real(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, result.ptr);
}

namespace {

struct Token {
  std::string text;
  std::size_t line;
  std::size_t column;
};

std::vector<Token> tokenize(std::istream& in) {
  std::vector<Token> tokens;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::size_t i = 0;
    while (i < line.size()) {
      const char c = line[i];
      if (c == ' ' || c == '\t' || c == '\r') {
        ++i;
      } else if (c == ':') {
        tokens.push_back({":", line_no, i + 1});
        ++i;
      } else {
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r' &&
               line[j] != ':') {
          ++j;
        }
        tokens.push_back({line.substr(i, j - i), line_no, i + 1});
        i = j;
      }
    }
  }
  return tokens;
}

class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  bool done() const { return pos_ >= tokens_.size(); }
  const Token* peek(std::size_t ahead = 0) const {
    return pos_ + ahead < tokens_.size() ? &tokens_[pos_ + ahead] : nullptr;
  }
  const Token& next(const char* what) {
    if (done()) throw error_at_end(std::string("expected ") + what);
    return tokens_[pos_++];
  }
  void expect_colon() {
    const Token& t = next("':'");
    if (t.text != ":") throw ParseError(t.line, t.column, "expected ':' but found '" + t.text + "'");
  }
  bool at_colon() const { return peek() && peek()->text == ":"; }
  /// True while the next token is on the given line.
  bool on_line(std::size_t line) const { return peek() && peek()->line == line; }

  ParseError error_at_end(const std::string& message) const {
    if (tokens_.empty()) return ParseError(1, 1, message + " before end of input");
    const Token& last = tokens_.back();
    return ParseError(last.line, last.column + last.text.size(), message + " before end of input");
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

double to_real(const Token& t) {
  double value = 0.0;
  const char* first = t.text.data();
  const char* last = first + t.text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(t.line, t.column, "expected a real number but found '" + t.text + "'");
  }
  return value;
}

std::size_t to_count(const Token& t) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
  if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
    throw ParseError(t.line, t.column, "expected a non-negative integer but found '" + t.text + "'");
  }
  return value;
}

bool is_count(const std::string& text) {
  return !text.empty() && std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; });
}

struct Dimension {
  std::size_t size = 0;
  std::vector<std::string> names;
  bool declared = false;
};

/// Resolves a name or number; '*' yields nullopt when allowed.
std::optional<std::size_t> resolve(const Token& t, const Dimension& dim, const char* kind,
                                   bool allow_all) {
  if (t.text == "*") {
    if (allow_all) return std::nullopt;
    throw ParseError(t.line, t.column, std::string("'*' is not allowed for ") + kind);
  }
  const auto it = std::find(dim.names.begin(), dim.names.end(), t.text);
  if (it != dim.names.end()) return static_cast<std::size_t>(it - dim.names.begin());
  if (is_count(t.text)) {
    const std::size_t i = to_count(t);
    if (i < dim.size) return i;
  }
  throw ParseError(t.line, t.column, std::string("unknown ") + kind + " '" + t.text + "'");
}

std::vector<double> read_row(TokenStream& ts, std::size_t count, const Token& anchor) {
  std::vector<double> row;
  row.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Token* t = ts.peek();
    if (!t || t->text == ":" || (ts.peek(1) && ts.peek(1)->text == ":")) {
      const std::size_t line = t ? t->line : anchor.line;
      const std::size_t column = t ? t->column : anchor.column;
      throw ParseError(line, column,
                       "row has " + std::to_string(i) + " entries, expected " + std::to_string(count));
    }
    row.push_back(to_real(ts.next("a real number")));
  }
  return row;
}

}  // namespace

Pomdp parse_model(std::istream& in) {
  TokenStream ts(tokenize(in));
  Dimension states;
  Dimension actions;
  Dimension observations;
  std::optional<double> discount;
  std::optional<Pomdp> model;
  std::vector<double> start;

  auto require_model = [&](const Token& at) -> Pomdp& {
    if (!model) {
      if (!states.declared || !actions.declared || !observations.declared) {
        throw ParseError(at.line, at.column,
                         "states, actions and observations must be declared before '" + at.text + "'");
      }
      model.emplace(states.size, actions.size, observations.size, 0.0);
      model->state_names = states.names;
      model->action_names = actions.names;
      model->observation_names = observations.names;
    }
    return *model;
  };
  auto actions_of = [&](const Token& t) {
    std::vector<ActionIndex> out;
    if (auto a = resolve(t, actions, "action", true)) {
      out.push_back(*a);
    } else {
      for (ActionIndex a2 = 0; a2 < actions.size; ++a2) out.push_back(a2);
    }
    return out;
  };

  while (!ts.done()) {
    const Token& key = ts.next("a statement");
    if (!key.text.empty() && (std::isdigit(static_cast<unsigned char>(key.text[0])) ||
                              key.text[0] == '-' || key.text[0] == '.')) {
      throw ParseError(key.line, key.column, "row has more entries than expected");
    }
    ts.expect_colon();
    if (key.text == "discount") {
      discount = to_real(ts.next("a discount factor"));
    } else if (key.text == "states" || key.text == "actions" || key.text == "observations") {
      Dimension& dim = key.text == "states" ? states : key.text == "actions" ? actions : observations;
      if (dim.declared || model) throw ParseError(key.line, key.column, "'" + key.text + "' declared twice or too late");
      dim.declared = true;
      std::vector<Token> items;
      while (ts.on_line(key.line)) items.push_back(ts.next("a name"));
      if (items.empty()) throw ParseError(key.line, key.column, "'" + key.text + "' needs a count or names");
      if (items.size() == 1 && is_count(items.front().text)) {
        dim.size = to_count(items.front());
        if (dim.size == 0) throw ParseError(items.front().line, items.front().column, "count must be positive");
      } else {
        for (const Token& t : items) {
          if (std::find(dim.names.begin(), dim.names.end(), t.text) != dim.names.end()) {
            throw ParseError(t.line, t.column, "duplicate name '" + t.text + "'");
          }
          dim.names.push_back(t.text);
        }
        dim.size = dim.names.size();
      }
    } else if (key.text == "start") {
      Pomdp& m = require_model(key);
      start = read_row(ts, m.num_states(), key);
    } else if (key.text == "T") {
      Pomdp& m = require_model(key);
      const Token& at = ts.next("an action");
      const auto acts = actions_of(at);
      const std::size_t n = m.num_states();
      if (!ts.at_colon()) {
        std::vector<std::vector<double>> rows;
        for (std::size_t s = 0; s < n; ++s) rows.push_back(read_row(ts, n, at));
        for (ActionIndex a : acts)
          for (StateIndex s = 0; s < n; ++s)
            for (StateIndex s2 = 0; s2 < n; ++s2) m.set_transition(a, s, s2, rows[s][s2]);
        continue;
      }
      ts.expect_colon();
      const StateIndex s = *resolve(ts.next("a state"), states, "state", false);
      if (!ts.at_colon()) {
        const auto row = read_row(ts, n, at);
        for (ActionIndex a : acts)
          for (StateIndex s2 = 0; s2 < n; ++s2) m.set_transition(a, s, s2, row[s2]);
        continue;
      }
      ts.expect_colon();
      const StateIndex s2 = *resolve(ts.next("a state"), states, "state", false);
      const double p = to_real(ts.next("a probability"));
      for (ActionIndex a : acts) m.set_transition(a, s, s2, p);
    } else if (key.text == "O") {
      Pomdp& m = require_model(key);
      const Token& at = ts.next("an action");
      const auto acts = actions_of(at);
      ts.expect_colon();
      const auto s_prev = resolve(ts.next("a previous state"), states, "state", true);
      ts.expect_colon();
      const StateIndex s_next = *resolve(ts.next("a state"), states, "state", false);
      const auto row = read_row(ts, m.num_observations(), at);
      for (ActionIndex a : acts) {
        for (ObservationIndex o = 0; o < row.size(); ++o) {
          if (s_prev) {
            m.set_observation(a, *s_prev, s_next, o, row[o]);
          } else {
            m.set_observation(a, s_next, o, row[o]);
          }
        }
      }
    } else if (key.text == "R") {
      Pomdp& m = require_model(key);
      const auto acts = actions_of(ts.next("an action"));
      ts.expect_colon();
      const StateIndex s = *resolve(ts.next("a state"), states, "state", false);
      const double v = to_real(ts.next("a reward"));
      for (ActionIndex a : acts) m.set_reward(s, a, v);
    } else {
      throw ParseError(key.line, key.column, "unknown statement '" + key.text + "'");
    }
  }
  if (!model) {
    if (!states.declared || !actions.declared || !observations.declared) {
      throw ts.error_at_end("states, actions and observations must be declared");
    }
    model.emplace(states.size, actions.size, observations.size, 0.0);
    model->state_names = states.names;
    model->action_names = actions.names;
    model->observation_names = observations.names;
  }
  if (!discount) throw ts.error_at_end("missing 'discount:'");
  model->set_discount(*discount);
  model->start = std::move(start);
  validate(*model);
  return std::move(*model);
}

Pomdp parse_model(const std::string& text) {
  std::istringstream in(text);
  return parse_model(in);
}

namespace {

void write_dimension(std::ostream& out, const char* key, std::size_t size,
                     const std::vector<std::string>& names) {
  out << key << ':';
  if (names.empty()) {
    out << ' ' << size;
  } else {
    for (const auto& n : names) out << ' ' << n;
  }
  out << '\n';
}

void write_row(std::ostream& out, auto&& values) {
  bool first = true;
  for (double v : values) {
    if (!first) out << ' ';
    out << format_real(v);
    first = false;
  }
  out << '\n';
}

}  // namespace

void serialize_model(std::ostream& out, const Pomdp& model) {
  const std::size_t n = model.num_states();
  out << "discount: " << format_real(model.discount()) << '\n';
  write_dimension(out, "states", n, model.state_names);
  write_dimension(out, "actions", model.num_actions(), model.action_names);
  write_dimension(out, "observations", model.num_observations(), model.observation_names);
  if (!model.start.empty()) {
    out << "start: ";
    write_row(out, model.start);
  }
  for (ActionIndex a = 0; a < model.num_actions(); ++a) {
    for (StateIndex s = 0; s < n; ++s) {
      out << "T: " << a << " : " << s << '\n';
      write_row(out, model.transition_row(a, s));
    }
  }
  std::vector<double> row(model.num_observations());
  for (ActionIndex a = 0; a < model.num_actions(); ++a) {
    const std::size_t prev_count = model.observation_uses_previous_state() ? n : 1;
    for (StateIndex sp = 0; sp < prev_count; ++sp) {
      for (StateIndex s2 = 0; s2 < n; ++s2) {
        for (ObservationIndex o = 0; o < row.size(); ++o) row[o] = model.observation(a, sp, s2, o);
        out << "O: " << a << " : ";
        if (model.observation_uses_previous_state()) {
          out << sp;
        } else {
          out << '*';
        }
        out << " : " << s2 << '\n';
        write_row(out, row);
      }
    }
  }
  for (ActionIndex a = 0; a < model.num_actions(); ++a) {
    for (StateIndex s = 0; s < n; ++s) {
      const double r = model.reward(s, a);
      if (r != 0.0 || std::signbit(r)) out << "R: " << a << " : " << s << ' ' << format_real(r) << '\n';
    }
  }
}

std::string serialize_model(const Pomdp& model) {
  std::ostringstream out;
  serialize_model(out, model);
  return out.str();
}

void write_solution(std::ostream& out, const SolutionDocument& doc) {
  if (doc.regions.size() != doc.sets.size()) {
    throw std::invalid_argument("solution needs one vector set per region");
  }
  out << "discount: " << format_real(doc.discount) << '\n';
  out << "states: " << doc.num_states << '\n';
  out << "horizon: " << doc.horizon << '\n';
  out << "residual: " << format_real(doc.residual) << '\n';
  out << "reward-shift: " << format_real(doc.reward_shift) << '\n';
  out << "regions: " << doc.regions.size() << '\n';
  for (std::size_t i = 0; i < doc.regions.size(); ++i) {
    out << "region: " << i << " :";
    for (StateIndex s : doc.regions[i].states()) out << ' ' << s;
    out << '\n';
  }
  for (std::size_t i = 0; i < doc.sets.size(); ++i) {
    out << "vectors: " << i << " : " << doc.sets[i].size() << '\n';
    for (const ValueVector& v : doc.sets[i]) {
      if (v.values.size() != doc.num_states) {
        throw std::invalid_argument("vector length differs from the number of states");
      }
      if (v.action == kNoAction) {
        out << "- :";
      } else {
        out << v.action << " :";
      }
      for (double x : v.values) out << ' ' << format_real(x);
      out << '\n';
    }
  }
}

std::string write_solution(const SolutionDocument& doc) {
  std::ostringstream out;
  write_solution(out, doc);
  return out.str();
}

SolutionDocument read_solution(std::istream& in) {
  TokenStream ts(tokenize(in));
  SolutionDocument doc;
  auto header = [&](const char* key) -> const Token& {
    const Token& k = ts.next(key);
    if (k.text != key) throw ParseError(k.line, k.column, std::string("expected '") + key + ":'");
    ts.expect_colon();
    return ts.next("a value");
  };
  doc.discount = to_real(header("discount"));
  doc.num_states = to_count(header("states"));
  doc.horizon = to_count(header("horizon"));
  doc.residual = to_real(header("residual"));
  doc.reward_shift = to_real(header("reward-shift"));
  const std::size_t region_count = to_count(header("regions"));
  for (std::size_t i = 0; i < region_count; ++i) {
    const Token& id = header("region");
    if (to_count(id) != i) throw ParseError(id.line, id.column, "regions must be numbered in order");
    ts.expect_colon();
    std::vector<StateIndex> members;
    while (ts.on_line(id.line)) {
      const Token& t = ts.next("a state");
      const std::size_t s = to_count(t);
      if (s >= doc.num_states) throw ParseError(t.line, t.column, "state out of range");
      members.push_back(s);
    }
    if (members.empty()) throw ParseError(id.line, id.column, "empty region");
    doc.regions.emplace_back(std::move(members));
  }
  doc.sets.resize(region_count);
  for (std::size_t i = 0; i < region_count; ++i) {
    const Token& id = header("vectors");
    if (to_count(id) != i) throw ParseError(id.line, id.column, "vector sets must follow region order");
    ts.expect_colon();
    const std::size_t count = to_count(ts.next("a vector count"));
    for (std::size_t j = 0; j < count; ++j) {
      const Token& tag = ts.next("an action tag");
      ValueVector v;
      v.action = tag.text == "-" ? kNoAction : to_count(tag);
      ts.expect_colon();
      while (ts.on_line(tag.line)) v.values.push_back(to_real(ts.next("a value")));
      if (v.values.size() != doc.num_states) {
        throw ParseError(tag.line, tag.column,
                         "vector has " + std::to_string(v.values.size()) + " entries, expected " +
                             std::to_string(doc.num_states));
      }
      doc.sets[i].push_back(std::move(v));
    }
  }
  if (!ts.done()) {
    const Token* t = ts.peek();
    throw ParseError(t->line, t->column, "unexpected '" + t->text + "'");
  }
  return doc;
}

SolutionDocument read_solution(const std::string& text) {
  std::istringstream in(text);
  return read_solution(in);
}

}  // namespace ropo
