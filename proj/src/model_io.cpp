#include "macdec/model_io.hpp"

#include <fmt/format.h>

#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "text.hpp"

namespace macdec {

namespace {

struct BodyLine {
  std::size_t number;
  char kind;  // 'T', 'O', 'R'
  std::string_view value;
};

std::vector<std::string> names_of(std::string_view value) {
  std::vector<std::string> out;
  for (auto tok : text::split_ws(value)) out.emplace_back(tok);
  return out;
}

class ModelReader {
 public:
  explicit ModelReader(std::string_view source) : lines_(text::lines(source)) {}

  ModelSpec read() {
    read_header();
    if (!agents_) throw ParseError(1, "missing 'agents:'");
    if (states_.empty()) throw ParseError(1, "missing 'states:'");
    std::vector<std::vector<std::string>> actions(*agents_), observations(*agents_);
    for (std::size_t i = 0; i < *agents_; ++i) {
      auto a = actions_.find(i);
      auto o = observations_.find(i);
      if (a == actions_.end()) throw ParseError(1, fmt::format("missing 'actions[{}]:'", i));
      if (o == observations_.end()) throw ParseError(1, fmt::format("missing 'observations[{}]:'", i));
      actions[i] = a->second;
      observations[i] = o->second;
    }
    if (actions_.size() != *agents_ || observations_.size() != *agents_)
      throw ParseError(1, "actions/observations declared for an agent index outside [0, agents)");
    model_ = ModelSpec(states_, std::move(actions), std::move(observations));
    model_.set_horizon(horizon_);
    model_.set_discount(discount_);
    read_start();
    read_body();
    auto violations = validate(model_);
    if (!violations.empty()) throw ValidationError(std::move(violations));
    return std::move(model_);
  }

 private:
  void read_header() {
    for (const auto& line : lines_) {
      std::string_view key, value;
      if (!text::key_value(line.content, key, value))
        throw ParseError(line.number, "expected 'key: value'");
      std::string_view base;
      std::size_t index = 0;
      if (key == "T" || key == "O" || key == "R") {
        body_.push_back({line.number, key[0], value});
      } else if (key == "agents") {
        long n = text::to_int(value, line.number);
        if (n < 1) throw ParseError(line.number, "agents must be >= 1");
        agents_ = static_cast<std::size_t>(n);
      } else if (key == "states") {
        states_ = names_of(value);
        if (states_.empty()) throw ParseError(line.number, "empty state list");
      } else if (key == "start") {
        start_ = value;
        start_line_ = line.number;
      } else if (key == "horizon") {
        if (value == "infinite") {
          horizon_ = std::nullopt;
        } else {
          long h = text::to_int(value, line.number);
          if (h < 1) throw ParseError(line.number, "horizon must be positive or 'infinite'");
          horizon_ = static_cast<int>(h);
        }
      } else if (key == "discount") {
        discount_ = text::to_double(value, line.number);
      } else if (key == "default_T") {
        if (value != "identity" && value != "uniform")
          throw ParseError(line.number, "default_T must be identity or uniform");
        default_t_ = std::string(value);
      } else if (key == "default_O") {
        if (value != "uniform") throw ParseError(line.number, "default_O must be uniform");
        default_o_ = std::string(value);
      } else if (text::indexed_key(key, base, index, line.number) && (base == "actions" || base == "observations")) {
        auto names = names_of(value);
        if (names.empty()) throw ParseError(line.number, "empty name list");
        auto& target = base == "actions" ? actions_ : observations_;
        if (!target.emplace(index, std::move(names)).second)
          throw ParseError(line.number, fmt::format("duplicate {}[{}]", base, index));
      } else {
        throw ParseError(line.number, "unknown directive '" + std::string(key) + "'");
      }
    }
  }

  void read_start() {
    const std::size_t S = model_.num_states();
    std::vector<double> b0(S, 0.0);
    auto toks = text::split_ws(start_);
    if (toks.empty()) {
      b0[0] = 1.0;
    } else if (toks.size() == 1 && toks[0] == "uniform") {
      b0.assign(S, 1.0 / static_cast<double>(S));
    } else if (toks.size() == 1 && model_.find_state(toks[0])) {
      b0[*model_.find_state(toks[0])] = 1.0;
    } else if (toks.size() == S) {
      for (std::size_t s = 0; s < S; ++s) b0[s] = text::to_double(toks[s], start_line_);
    } else {
      throw ParseError(start_line_, "start must be a state name, 'uniform', or one probability per state");
    }
    model_.set_initial_belief(std::move(b0));
  }

  std::size_t state(std::string_view name, std::size_t line) const {
    auto s = model_.find_state(name);
    if (!s) throw ParseError(line, "unknown state '" + std::string(name) + "'");
    return *s;
  }

  std::size_t joint_action(std::string_view names, std::size_t line) const {
    auto toks = text::split_ws(names);
    if (toks.size() != model_.num_agents())
      throw ParseError(line, fmt::format("joint action needs {} names, got {}", model_.num_agents(), toks.size()));
    std::vector<std::size_t> parts;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      auto a = model_.find_action(i, toks[i]);
      if (!a) throw ParseError(line, fmt::format("unknown action '{}' for agent {}", toks[i], i));
      parts.push_back(*a);
    }
    return model_.encode_action(parts);
  }

  std::size_t joint_observation(std::span<const std::string_view> toks, std::size_t line) const {
    if (toks.size() != model_.num_agents())
      throw ParseError(line,
                       fmt::format("joint observation needs {} names, got {}", model_.num_agents(), toks.size()));
    std::vector<std::size_t> parts;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      auto o = model_.find_observation(i, toks[i]);
      if (!o) throw ParseError(line, fmt::format("unknown observation '{}' for agent {}", toks[i], i));
      parts.push_back(*o);
    }
    return model_.encode_observation(parts);
  }

  static void add_entry(std::vector<Entry>& row, std::size_t index, double prob, std::size_t line) {
    for (const auto& e : row)
      if (e.index == index) throw ParseError(line, "duplicate entry");
    row.push_back({index, prob});
  }

  void read_body() {
    const std::size_t S = model_.num_states();
    const std::size_t A = model_.num_joint_actions();
    std::vector<std::vector<Entry>> t_rows(S * A), o_rows(A * S);
    std::vector<bool> t_seen(S * A, false), o_seen(A * S, false), r_seen(S * A, false);

    for (const auto& b : body_) {
      auto fields = text::split(b.value, ':');
      if (b.kind == 'T') {
        if (fields.size() != 3) throw ParseError(b.number, "T needs '<joint-action> : <s> : <s'> <prob>'");
        auto a = joint_action(fields[0], b.number);
        auto s = state(fields[1], b.number);
        auto tail = text::split_ws(fields[2]);
        if (tail.size() != 2) throw ParseError(b.number, "T needs '<s'> <prob>'");
        auto next = state(tail[0], b.number);
        add_entry(t_rows[s * A + a], next, text::to_double(tail[1], b.number), b.number);
        t_seen[s * A + a] = true;
      } else if (b.kind == 'O') {
        if (fields.size() != 3) throw ParseError(b.number, "O needs '<joint-action> : <s'> : <joint-obs> <prob>'");
        auto a = joint_action(fields[0], b.number);
        auto next = state(fields[1], b.number);
        auto tail = text::split_ws(fields[2]);
        if (tail.size() != model_.num_agents() + 1) throw ParseError(b.number, "O needs '<joint-obs> <prob>'");
        auto o = joint_observation(std::span(tail).first(model_.num_agents()), b.number);
        add_entry(o_rows[a * S + next], o, text::to_double(tail.back(), b.number), b.number);
        o_seen[a * S + next] = true;
      } else {
        if (fields.size() != 2) throw ParseError(b.number, "R needs '<joint-action> : <s> <value>'");
        auto a = joint_action(fields[0], b.number);
        auto tail = text::split_ws(fields[1]);
        if (tail.size() != 2) throw ParseError(b.number, "R needs '<s> <value>'");
        auto s = state(tail[0], b.number);
        if (r_seen[s * A + a]) throw ParseError(b.number, "duplicate reward entry");
        r_seen[s * A + a] = true;
        model_.set_reward(s, a, text::to_double(tail[1], b.number));
      }
    }

    const std::size_t last_line = lines_.empty() ? 1 : lines_.back().number;
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t a = 0; a < A; ++a) {
        auto& row = t_rows[s * A + a];
        if (!t_seen[s * A + a]) {
          if (default_t_ == "identity") {
            row = {{s, 1.0}};
          } else if (default_t_ == "uniform") {
            for (std::size_t n = 0; n < S; ++n) row.push_back({n, 1.0 / static_cast<double>(S)});
          } else {
            throw ParseError(last_line, fmt::format("no T entries for (s={}, a={}) and no default_T",
                                                    model_.state_names()[s], model_.joint_action_label(a)));
          }
        }
        model_.set_transition(s, a, make_dist(std::move(row)));
      }
    }
    const std::size_t W = model_.num_joint_observations();
    for (std::size_t a = 0; a < A; ++a) {
      for (std::size_t s = 0; s < S; ++s) {
        auto& row = o_rows[a * S + s];
        if (!o_seen[a * S + s]) {
          if (default_o_ != "uniform")
            throw ParseError(last_line, fmt::format("no O entries for (a={}, s'={}) and no default_O",
                                                    model_.joint_action_label(a), model_.state_names()[s]));
          for (std::size_t o = 0; o < W; ++o) row.push_back({o, 1.0 / static_cast<double>(W)});
        }
        model_.set_observation(a, s, make_dist(std::move(row)));
      }
    }
  }

  std::vector<text::Line> lines_;
  std::vector<BodyLine> body_;
  std::optional<std::size_t> agents_;
  std::vector<std::string> states_;
  std::map<std::size_t, std::vector<std::string>> actions_, observations_;
  std::string_view start_;
  std::size_t start_line_ = 1;
  std::optional<int> horizon_ = 1;
  double discount_ = 1.0;
  std::string default_t_, default_o_;
  ModelSpec model_;
};

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ' ';
    out += n;
  }
  return out;
}

}  // namespace

ModelSpec parse_model(std::string_view source) { return ModelReader(source).read(); }

std::string emit_model(const ModelSpec& m) {
  fmt::memory_buffer out;
  auto it = std::back_inserter(out);
  fmt::format_to(it, "agents: {}\n", m.num_agents());
  fmt::format_to(it, "states: {}\n", join(m.state_names()));
  fmt::format_to(it, "start:");
  for (double p : m.initial_belief()) fmt::format_to(it, " {}", p);
  fmt::format_to(it, "\n");
  if (m.horizon())
    fmt::format_to(it, "horizon: {}\n", *m.horizon());
  else
    fmt::format_to(it, "horizon: infinite\n");
  fmt::format_to(it, "discount: {}\n", m.discount());
  for (std::size_t i = 0; i < m.num_agents(); ++i) {
    fmt::format_to(it, "actions[{}]: {}\n", i, join(m.action_names(i)));
    fmt::format_to(it, "observations[{}]: {}\n", i, join(m.observation_names(i)));
  }
  const auto& S = m.state_names();
  for (std::size_t s = 0; s < m.num_states(); ++s)
    for (std::size_t a = 0; a < m.num_joint_actions(); ++a)
      for (const auto& e : m.transition(s, a))
        fmt::format_to(it, "T: {} : {} : {} {}\n", m.joint_action_label(a), S[s], S[e.index], e.prob);
  for (std::size_t a = 0; a < m.num_joint_actions(); ++a)
    for (std::size_t s = 0; s < m.num_states(); ++s)
      for (const auto& e : m.observe(a, s))
        fmt::format_to(it, "O: {} : {} : {} {}\n", m.joint_action_label(a), S[s], m.joint_observation_label(e.index),
                       e.prob);
  for (std::size_t s = 0; s < m.num_states(); ++s)
    for (std::size_t a = 0; a < m.num_joint_actions(); ++a)
      if (double r = m.reward(s, a); r != 0.0) fmt::format_to(it, "R: {} : {} {}\n", m.joint_action_label(a), S[s], r);
  return fmt::to_string(out);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

ModelSpec load_model(const std::string& path) { return parse_model(read_file(path)); }

}  // namespace macdec
