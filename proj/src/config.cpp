#include "concord/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <type_traits>

#include "concord/error.hpp"

namespace concord {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Values are parsed whole; trailing junk is an error.
template <typename T>
bool parse_number(const std::string& s, T& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if constexpr (std::is_unsigned_v<T>) {
    if (*first == '-' || *first == '+') return false;
  }
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

template <typename T>
bool parse_list(const std::string& s, std::vector<T>& out) {
  out.clear();
  if (trim(s).empty()) return true;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    T v{};
    if (!parse_number(trim(item), v)) return false;
    out.push_back(v);
  }
  return true;
}

bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "1") {
    out = true;
  } else if (s == "false" || s == "0") {
    out = false;
  } else {
    return false;
  }
  return true;
}

template <typename T>
std::string format_number(T v) {
  if constexpr (std::is_floating_point_v<T>) {
    return format_double(v);
  } else {
    return std::to_string(v);
  }
}

template <typename T>
std::string format_list(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_number(v[i]);
  }
  return out;
}

struct Key {
  std::string name;
  std::function<bool(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename M>
Key field_key(std::string name, M accessor) {
  using T = std::remove_reference_t<decltype(accessor(std::declval<RunConfig&>()))>;
  return {std::move(name),
          [accessor](RunConfig& c, const std::string& v) {
            T& field = accessor(c);
            if constexpr (std::is_same_v<T, bool>) {
              return parse_bool(v, field);
            } else if constexpr (std::is_arithmetic_v<T>) {
              return parse_number(v, field);
            } else {
              return parse_list(v, field);
            }
          },
          [accessor](const RunConfig& c) {
            const T& field = accessor(const_cast<RunConfig&>(c));
            if constexpr (std::is_same_v<T, bool>) {
              return std::string(field ? "true" : "false");
            } else if constexpr (std::is_arithmetic_v<T>) {
              return format_number(field);
            } else {
              return format_list(field);
            }
          }};
}

#define CONCORD_KEY(name, expr) field_key(name, [](RunConfig& c) -> auto& { return expr; })

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      CONCORD_KEY("epochs", c.train.epochs),
      CONCORD_KEY("batch_size", c.train.batch_size),
      CONCORD_KEY("views", c.train.views),
      CONCORD_KEY("ratio", c.train.ratio),
      CONCORD_KEY("lr_max", c.train.lr_max),
      CONCORD_KEY("lr_min", c.train.lr_min),
      CONCORD_KEY("adam_beta1", c.train.optimizer.beta1),
      CONCORD_KEY("adam_beta2", c.train.optimizer.beta2),
      CONCORD_KEY("adam_eps", c.train.optimizer.eps),
      CONCORD_KEY("weight_decay", c.train.optimizer.weight_decay),
      CONCORD_KEY("alpha", c.train.weights.alpha),
      CONCORD_KEY("beta", c.train.weights.beta),
      CONCORD_KEY("delta", c.train.weights.delta),
      CONCORD_KEY("seed", c.train.seed),
      CONCORD_KEY("input_points", c.train.input_points),
      CONCORD_KEY("output_points", c.train.output_points),
      CONCORD_KEY("encoder_widths", c.train.encoder_widths),
      CONCORD_KEY("decoder_widths", c.train.decoder_widths),
      CONCORD_KEY("eval_fraction", c.train.eval_fraction),
      CONCORD_KEY("eval_views", c.train.eval_views),
      CONCORD_KEY("eval_seed", c.train.eval_seed),
      CONCORD_KEY("train_eval_objects", c.train.train_eval_objects),
      CONCORD_KEY("record_timing", c.train.record_timing),
      CONCORD_KEY("fixed_views", c.train.fixed_views),
      CONCORD_KEY("seeds", c.seeds),
      CONCORD_KEY("n_list", c.n_list),
      CONCORD_KEY("step_budget", c.step_budget),
      CONCORD_KEY("toy_k1", c.toy.k1),
      CONCORD_KEY("toy_k2", c.toy.k2),
      CONCORD_KEY("toy_n", c.toy.n),
      CONCORD_KEY("toy_replicas", c.toy_replicas),
      CONCORD_KEY("eval_ratios", c.eval_ratios),
  };
  return table;
}

#undef CONCORD_KEY

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

void RunConfig::validate() const {
  train.validate();
  const auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigError, what); };
  if (seeds.empty()) fail("seeds must not be empty");
  if (n_list.empty()) fail("n_list must not be empty");
  for (std::size_t n : n_list) {
    if (n < 2) fail("n_list entries must be >= 2");
    if (n > step_budget) fail("n_list entries must not exceed step_budget");
  }
  try {
    toy.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
  if (toy_replicas < 1) fail("toy_replicas must be >= 1");
  if (eval_ratios.empty()) fail("eval_ratios must not be empty");
  for (double r : eval_ratios) {
    if (!(r > 0.0 && r < 1.0)) fail("eval_ratios must lie in (0, 1)");
  }
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  std::map<std::string, const Key*> by_name;
  for (const auto& k : keys()) by_name[k.name] = &k;

  RunConfig config;
  std::map<std::string, std::size_t> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  const auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::ConfigError, source + ":" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    auto it = by_name.find(key);
    if (it == by_name.end()) fail("unknown key '" + key + "'");
    if (auto prev = seen.find(key); prev != seen.end()) {
      fail("duplicate key '" + key + "' (first set on line " + std::to_string(prev->second) + ")");
    }
    seen[key] = lineno;
    if (!it->second->set(config, value)) fail("bad value '" + value + "' for key '" + key + "'");
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string serialize_config(const RunConfig& config) {
  std::string out;
  for (const auto& k : keys()) {
    out += k.name;
    out += " = ";
    out += k.get(config);
    out += '\n';
  }
  return out;
}

}  // namespace concord
