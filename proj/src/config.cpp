#include "nlseg/config.hpp"

#include <algorithm>
#include <filesystem>
#include <iterator>
#include <map>
#include <set>

#include "json.hpp"

#include "nlseg/errors.hpp"
#include "nlseg/io.hpp"

namespace nlseg {

using nlohmann::json;

namespace {

// Character iterator that counts the newlines it has stepped over.
struct LineIter {
  using iterator_category = std::forward_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  const char* p = nullptr;
  int* line = nullptr;

  reference operator*() const { return *p; }
  LineIter& operator++() {
    if (*p == '\n') ++*line;
    ++p;
    return *this;
  }
  LineIter operator++(int) {
    LineIter t = *this;
    ++*this;
    return t;
  }
  bool operator==(const LineIter& o) const { return p == o.p; }
  bool operator!=(const LineIter& o) const { return p != o.p; }
};

std::string escape(const std::string& k) {
  std::string out;
  for (char c : k) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

// Records the line of every object key, addressed by JSON pointer.
struct LineMapper : nlohmann::json_sax<json> {
  struct Frame {
    bool array = false;
    long index = -1;
    std::string key;
  };
  std::vector<Frame> frames;
  std::map<std::string, int> lines;
  const int* line = nullptr;

  std::string pointer() const {
    std::string p;
    for (const auto& f : frames) {
      if (&f == &frames.back()) break;
      p += "/" + (f.array ? std::to_string(f.index) : escape(f.key));
    }
    return p;
  }
  void value() {
    if (!frames.empty() && frames.back().array) ++frames.back().index;
  }
  bool open(bool array) {
    value();
    frames.push_back({array, -1, ""});
    return true;
  }
  bool null() override { return value(), true; }
  bool boolean(bool) override { return value(), true; }
  bool number_integer(number_integer_t) override { return value(), true; }
  bool number_unsigned(number_unsigned_t) override { return value(), true; }
  bool number_float(number_float_t, const string_t&) override { return value(), true; }
  bool string(string_t&) override { return value(), true; }
  bool binary(binary_t&) override { return value(), true; }
  bool start_object(std::size_t) override { return open(false); }
  bool start_array(std::size_t) override { return open(true); }
  bool end_object() override { return frames.pop_back(), true; }
  bool end_array() override { return frames.pop_back(), true; }
  bool key(string_t& k) override {
    frames.back().key = k;
    lines.emplace(pointer() + "/" + escape(k), *line);
    return true;
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override { return false; }
};

class Reader {
 public:
  Reader(std::string origin, std::map<std::string, int> lines) : origin_(std::move(origin)), lines_(std::move(lines)) {}

  [[noreturn]] void error(const std::string& ptr, const std::string& msg) const {
    std::string key = ptr.empty() ? "<root>" : ptr.substr(1);
    std::replace(key.begin(), key.end(), '/', '.');
    int line = 0;
    // the nearest recorded ancestor gives the line for missing keys
    for (std::string p = ptr;; p = p.substr(0, p.rfind('/'))) {
      auto it = lines_.find(p);
      if (it != lines_.end()) {
        line = it->second;
        break;
      }
      if (p.empty()) break;
    }
    fail(ErrorCode::ConfigError,
         origin_ + (line ? ":" + std::to_string(line) : std::string()) + ": key '" + key + "': " + msg);
  }

  const json& object(const json& parent, const std::string& ptr, const char* k, bool required) const {
    static const json empty = json::object();
    std::string p = ptr + "/" + k;
    if (!parent.contains(k)) {
      if (required) error(p, "required section is missing");
      return empty;
    }
    const json& v = parent.at(k);
    if (!v.is_object()) error(p, "expected an object");
    return v;
  }

  void allow(const json& obj, const std::string& ptr, std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!ok.count(it.key())) error(ptr + "/" + escape(it.key()), "unknown key");
  }

  bool has(const json& obj, const char* k) const { return obj.contains(k); }

  double number(const json& obj, const std::string& ptr, const char* k, double def, bool required = false) const {
    std::string p = ptr + "/" + k;
    if (!obj.contains(k)) {
      if (required) error(p, "required value is missing");
      return def;
    }
    const json& v = obj.at(k);
    if (!v.is_number()) error(p, "expected a number");
    return v.get<double>();
  }

  long integer(const json& obj, const std::string& ptr, const char* k, long def, bool required = false) const {
    std::string p = ptr + "/" + k;
    if (!obj.contains(k)) {
      if (required) error(p, "required value is missing");
      return def;
    }
    const json& v = obj.at(k);
    if (!v.is_number_integer()) error(p, "expected an integer");
    return v.get<long>();
  }

  bool boolean(const json& obj, const std::string& ptr, const char* k, bool def) const {
    if (!obj.contains(k)) return def;
    const json& v = obj.at(k);
    if (!v.is_boolean()) error(ptr + "/" + k, "expected true or false");
    return v.get<bool>();
  }

  std::string text(const json& obj, const std::string& ptr, const char* k, const std::string& def,
                    std::initializer_list<const char*> choices = {}, bool required = false) const {
    std::string p = ptr + "/" + k;
    if (!obj.contains(k)) {
      if (required) error(p, "required value is missing");
      return def;
    }
    const json& v = obj.at(k);
    if (!v.is_string()) error(p, "expected a string");
    std::string s = v.get<std::string>();
    if (choices.size()) {
      bool found = false;
      std::string list;
      for (const char* c : choices) {
        found = found || s == c;
        list += list.empty() ? c : std::string(", ") + c;
      }
      if (!found) error(p, "unknown value '" + s + "' (expected one of: " + list + ")");
    }
    return s;
  }

  std::vector<double> numbers(const json& obj, const std::string& ptr, const char* k, bool required = false) const {
    std::string p = ptr + "/" + k;
    if (!obj.contains(k)) {
      if (required) error(p, "required value is missing");
      return {};
    }
    const json& v = obj.at(k);
    if (!v.is_array()) error(p, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) error(p, "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  void require(bool ok, const std::string& ptr, const std::string& msg) const {
    if (!ok) error(ptr, msg);
  }

 private:
  std::string origin_;
  std::map<std::string, int> lines_;
};

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& origin, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ConfigError, origin + ": " + e.what());
  }
  int line = 1;
  LineMapper mapper;
  mapper.line = &line;
  LineIter first{text.data(), &line}, last{text.data() + text.size(), &line};
  json::sax_parse(first, last, &mapper);

  Reader rd(origin, mapper.lines);
  if (!root.is_object()) rd.error("", "the document must be a JSON object");
  rd.allow(root, "",
           {"schema_version", "name", "domain", "norm", "interaction", "data", "solver", "eps_schedule", "obstacle",
            "analysis", "output", "rng_seed"});

  ExperimentConfig c;
  c.base_dir = base_dir;
  if (!root.contains("schema_version")) rd.error("/schema_version", "required value is missing");
  c.schema_version = static_cast<int>(rd.integer(root, "", "schema_version", 0, true));
  rd.require(c.schema_version == kSchemaVersion, "/schema_version",
             "unsupported version " + std::to_string(c.schema_version) + " (this build reads " +
                 std::to_string(kSchemaVersion) + ")");
  c.name = rd.text(root, "", "name", c.name);
  {
    long seed = rd.integer(root, "", "rng_seed", 0);
    rd.require(seed >= 0, "/rng_seed", "must be nonnegative");
    c.rng_seed = static_cast<std::uint64_t>(seed);
  }

  // domain
  {
    const std::string P = "/domain";
    const json& d = rd.object(root, "", "domain", true);
    auto& ds = c.domain;
    ds.shape = rd.text(d, P, "shape", "", {"rectangle", "strip", "annulus", "disk"}, true);
    if (ds.shape == "rectangle" || ds.shape == "strip") {
      rd.allow(d, P, {"shape", "width", "height", "h", "h_over_eps", "h_max", "use_symmetry"});
      ds.width = rd.number(d, P, "width", 0, true);
      ds.height = rd.number(d, P, "height", 0, true);
      rd.require(ds.width > 0, P + "/width", "must be positive");
      rd.require(ds.height > 0, P + "/height", "must be positive");
    } else if (ds.shape == "annulus") {
      rd.allow(d, P, {"shape", "a", "b", "h", "h_over_eps", "h_max", "use_symmetry"});
      ds.a = rd.number(d, P, "a", 0, true);
      ds.b = rd.number(d, P, "b", 0, true);
      rd.require(ds.a > 0, P + "/a", "must be positive");
      rd.require(ds.b > ds.a, P + "/b", "must exceed a");
    } else {
      rd.allow(d, P, {"shape", "radius", "h", "h_over_eps", "h_max", "use_symmetry"});
      ds.radius = rd.number(d, P, "radius", 0, true);
      rd.require(ds.radius > 0, P + "/radius", "must be positive");
    }
    ds.use_symmetry = rd.boolean(d, P, "use_symmetry", true);
    rd.require(!(rd.has(d, "h") && rd.has(d, "h_over_eps")), P + "/h", "give either h or h_over_eps, not both");
    if (rd.has(d, "h")) {
      ds.h = rd.number(d, P, "h", 0);
      rd.require(ds.h > 0, P + "/h", "must be positive");
      c.h_over_eps = 0;
    } else {
      c.h_over_eps = rd.number(d, P, "h_over_eps", 8);
      rd.require(c.h_over_eps > 0, P + "/h_over_eps", "must be positive");
    }
    c.h_max = rd.number(d, P, "h_max", c.h_max);
    rd.require(c.h_max > 0, P + "/h_max", "must be positive");
  }

  // norm
  {
    const std::string P = "/norm";
    const json& n = rd.object(root, "", "norm", false);
    std::string kind = rd.text(n, P, "kind", "euclidean", {"euclidean", "ellipse", "smoothed_p"});
    if (kind == "euclidean") {
      rd.allow(n, P, {"kind", "convexity_floor"});
      c.norm = Norm::euclidean();
    } else if (kind == "ellipse") {
      rd.allow(n, P, {"kind", "ax", "ay", "convexity_floor"});
      double ax = rd.number(n, P, "ax", 0, true), ay = rd.number(n, P, "ay", 0, true);
      rd.require(ax > 0, P + "/ax", "must be positive");
      rd.require(ay > 0, P + "/ay", "must be positive");
      c.norm = Norm::ellipse(ax, ay);
    } else {
      rd.allow(n, P, {"kind", "p", "blend", "convexity_floor"});
      double p = rd.number(n, P, "p", 0, true), blend = rd.number(n, P, "blend", 0, true);
      rd.require(p >= 2, P + "/p", "must be at least 2");
      rd.require(blend >= 0 && blend <= 1, P + "/blend", "must lie in [0, 1]");
      c.norm = Norm::smoothed_p(p, blend);
    }
    c.convexity_floor = rd.number(n, P, "convexity_floor", c.convexity_floor);
    rd.require(c.convexity_floor > 0, P + "/convexity_floor", "must be positive");
  }

  // interaction
  {
    const std::string P = "/interaction";
    const json& in = rd.object(root, "", "interaction", false);
    std::string form = rd.text(in, P, "form", "integral", {"integral", "sup"});
    if (form == "integral") {
      rd.allow(in, P, {"form", "p", "C", "q"});
      c.interaction.form = HForm::Integral;
      c.interaction.p = rd.number(in, P, "p", 1);
      c.interaction.phi.C = rd.number(in, P, "C", 1);
      c.interaction.phi.q = rd.number(in, P, "q", 0);
      rd.require(c.interaction.p >= 1, P + "/p", "must be at least 1");
      rd.require(c.interaction.phi.C > 0, P + "/C", "must be positive");
      rd.require(c.interaction.phi.q >= 0, P + "/q", "must be nonnegative");
    } else {
      rd.allow(in, P, {"form"});
      c.interaction.form = HForm::Sup;
    }
  }

  // data
  {
    const std::string P = "/data";
    const json& d = rd.object(root, "", "data", true);
    rd.allow(d, P, {"preset", "K", "values", "csv", "density_c"});
    auto& ds = c.data;
    ds.preset = rd.text(d, P, "preset", "", {"annulus_rims", "strip_linear", "disk_sectors", "csv"}, true);
    static const std::map<std::string, std::string> shape_of = {
        {"annulus_rims", "annulus"}, {"strip_linear", "strip"}, {"disk_sectors", "disk"}};
    auto it = shape_of.find(ds.preset);
    if (it != shape_of.end())
      rd.require(c.domain.shape == it->second, P + "/preset", "preset needs a " + it->second + " domain");
    ds.K = static_cast<int>(rd.integer(d, P, "K", 2));
    rd.require(ds.K >= 1, P + "/K", "must be at least 1");
    if (ds.preset != "csv") rd.require(ds.K == 2, P + "/K", "the built-in presets have K = 2");
    ds.values = rd.numbers(d, P, "values");
    if (!ds.values.empty()) {
      rd.require(static_cast<int>(ds.values.size()) == ds.K, P + "/values", "needs one value per population");
      for (double v : ds.values) rd.require(v >= 0, P + "/values", "values must be nonnegative");
    }
    if (ds.preset == "csv") {
      std::string path = rd.text(d, P, "csv", "", {}, true);
      std::filesystem::path fp(path);
      ds.csv_path = fp.is_absolute() ? path : (std::filesystem::path(base_dir) / fp).lexically_normal().string();
    } else {
      rd.require(!rd.has(d, "csv"), P + "/csv", "only used with the csv preset");
    }
    c.density_c = rd.number(d, P, "density_c", c.density_c);
    rd.require(c.density_c >= 0 && c.density_c <= 1, P + "/density_c", "must lie in [0, 1]");
  }

  // solver
  {
    const std::string P = "/solver";
    const json& s = rd.object(root, "", "solver", false);
    rd.allow(s, P, {"damping", "anderson_depth", "fp_tol", "max_outer", "lin_tol", "linear", "lin_max_iter"});
    auto& sc = c.solver;
    sc.damping = rd.number(s, P, "damping", sc.damping);
    rd.require(sc.damping > 0 && sc.damping <= 1, P + "/damping", "must lie in (0, 1]");
    sc.anderson_depth = static_cast<int>(rd.integer(s, P, "anderson_depth", sc.anderson_depth));
    rd.require(sc.anderson_depth >= 0 && sc.anderson_depth <= 50, P + "/anderson_depth", "must lie in [0, 50]");
    sc.fp_tol = rd.number(s, P, "fp_tol", sc.fp_tol);
    rd.require(sc.fp_tol > 0, P + "/fp_tol", "must be positive");
    sc.max_outer = static_cast<int>(rd.integer(s, P, "max_outer", sc.max_outer));
    rd.require(sc.max_outer >= 1, P + "/max_outer", "must be at least 1");
    sc.lin.tol = rd.number(s, P, "lin_tol", sc.lin.tol);
    rd.require(sc.lin.tol > 0 && sc.lin.tol < 1, P + "/lin_tol", "must lie in (0, 1)");
    std::string m = rd.text(s, P, "linear", "multigrid", {"multigrid", "jacobi"});
    sc.lin.method = m == "jacobi" ? LinearMethod::Jacobi : LinearMethod::Multigrid;
    sc.lin.max_iter = static_cast<int>(rd.integer(s, P, "lin_max_iter", 0));
    rd.require(sc.lin.max_iter >= 0, P + "/lin_max_iter", "must be nonnegative");
  }

  // schedule
  {
    c.solver.eps_schedule = rd.numbers(root, "", "eps_schedule", true);
    const auto& e = c.solver.eps_schedule;
    rd.require(!e.empty(), "/eps_schedule", "must not be empty");
    for (std::size_t k = 0; k < e.size(); ++k) {
      rd.require(e[k] > 0, "/eps_schedule", "values must be positive");
      if (k) rd.require(e[k] < e[k - 1], "/eps_schedule", "values must be strictly decreasing");
    }
  }

  // obstacle
  if (root.contains("obstacle")) {
    const std::string P = "/obstacle";
    const json& o = rd.object(root, "", "obstacle", false);
    rd.allow(o, P, {"mu", "lambda"});
    c.obstacle.enabled = true;
    c.obstacle.mu = rd.number(o, P, "mu", 0, true);
    c.obstacle.lambda = rd.number(o, P, "lambda", 0, true);
    rd.require(c.obstacle.mu > 0, P + "/mu", "must be positive");
    rd.require(c.obstacle.lambda > c.obstacle.mu && c.obstacle.lambda < 1, P + "/lambda", "must satisfy mu < lambda < 1");
    rd.require(c.data.preset != "csv", P, "obstacles need a preset with boundary curves");
  }

  // analysis
  {
    const std::string P = "/analysis";
    const json& a = rd.object(root, "", "analysis", false);
    rd.allow(a, P,
             {"delta_abs", "delta_rel", "separation", "ball_regularization", "interfaces", "fb_condition",
              "mass_balance", "decay", "gradient_bound", "singular_points", "radial_crosscheck",
              "threshold_robustness", "decay_probes", "gradient_radii", "random_probes"});
    auto& ac = c.analysis;
    ac.delta_abs = rd.number(a, P, "delta_abs", ac.delta_abs);
    rd.require(ac.delta_abs >= 0, P + "/delta_abs", "must be nonnegative");
    ac.delta_rel = rd.number(a, P, "delta_rel", ac.delta_rel);
    rd.require(ac.delta_rel > 0 && ac.delta_rel < 1, P + "/delta_rel", "must lie in (0, 1)");
    ac.separation = rd.boolean(a, P, "separation", ac.separation);
    ac.ball_regularization = rd.boolean(a, P, "ball_regularization", ac.ball_regularization);
    ac.interfaces = rd.boolean(a, P, "interfaces", ac.interfaces);
    ac.fb_condition = rd.boolean(a, P, "fb_condition", ac.fb_condition);
    ac.mass_balance = rd.boolean(a, P, "mass_balance", ac.mass_balance);
    ac.decay = rd.boolean(a, P, "decay", ac.decay);
    ac.gradient_bound = rd.boolean(a, P, "gradient_bound", ac.gradient_bound);
    ac.singular_points = rd.boolean(a, P, "singular_points", ac.singular_points);
    ac.radial_crosscheck = rd.boolean(a, P, "radial_crosscheck", ac.radial_crosscheck);
    ac.threshold_robustness = rd.boolean(a, P, "threshold_robustness", ac.threshold_robustness);
    if (a.contains("decay_probes")) {
      const json& v = a.at("decay_probes");
      bool ok = v.is_array();
      if (ok)
        for (const auto& e : v) {
          ok = ok && e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number();
          if (ok) ac.decay_probes.push_back({e[0].get<double>(), e[1].get<double>()});
        }
      rd.require(ok, P + "/decay_probes", "expected an array of [x, y] pairs");
    }
    ac.gradient_radii = rd.numbers(a, P, "gradient_radii");
    for (double r : ac.gradient_radii) rd.require(r > 0, P + "/gradient_radii", "radii must be positive");
    ac.random_probes = static_cast<int>(rd.integer(a, P, "random_probes", ac.random_probes));
    rd.require(ac.random_probes >= 0 && ac.random_probes <= 1000, P + "/random_probes", "must lie in [0, 1000]");
  }

  // output
  {
    const std::string P = "/output";
    const json& o = rd.object(root, "", "output", false);
    rd.allow(o, P, {"dir", "dump_fields"});
    c.output.dir = rd.text(o, P, "dir", c.output.dir);
    rd.require(!c.output.dir.empty(), P + "/dir", "must not be empty");
    c.output.dump_fields = rd.boolean(o, P, "dump_fields", c.output.dump_fields);
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const Error& e) {
    fail(ErrorCode::ConfigError, path + ": cannot read the file");
  }
  std::string base = std::filesystem::path(path).parent_path().string();
  return parse_config(text, path, base.empty() ? "." : base);
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["name"] = c.name;
  j["rng_seed"] = c.rng_seed;
  json d;
  d["shape"] = c.domain.shape;
  if (c.domain.shape == "rectangle" || c.domain.shape == "strip") {
    d["width"] = c.domain.width;
    d["height"] = c.domain.height;
  } else if (c.domain.shape == "annulus") {
    d["a"] = c.domain.a;
    d["b"] = c.domain.b;
  } else {
    d["radius"] = c.domain.radius;
  }
  if (c.h_over_eps > 0) d["h_over_eps"] = c.h_over_eps;
  else d["h"] = c.domain.h;
  d["h_max"] = c.h_max;
  d["use_symmetry"] = c.domain.use_symmetry;
  j["domain"] = d;

  json n;
  switch (c.norm.kind) {
    case Norm::Kind::Euclidean:
      n["kind"] = "euclidean";
      break;
    case Norm::Kind::Ellipse:
      n["kind"] = "ellipse";
      n["ax"] = c.norm.ax;
      n["ay"] = c.norm.ay;
      break;
    case Norm::Kind::SmoothedP:
      n["kind"] = "smoothed_p";
      n["p"] = c.norm.p;
      n["blend"] = c.norm.blend;
      break;
  }
  n["convexity_floor"] = c.convexity_floor;
  j["norm"] = n;

  json in;
  if (c.interaction.form == HForm::Integral) {
    in["form"] = "integral";
    in["p"] = c.interaction.p;
    in["C"] = c.interaction.phi.C;
    in["q"] = c.interaction.phi.q;
  } else {
    in["form"] = "sup";
  }
  j["interaction"] = in;

  json da;
  da["preset"] = c.data.preset;
  da["K"] = c.data.K;
  if (!c.data.values.empty()) da["values"] = c.data.values;
  if (c.data.preset == "csv") da["csv"] = std::filesystem::absolute(c.data.csv_path).lexically_normal().string();
  da["density_c"] = c.density_c;
  j["data"] = da;

  json s;
  s["damping"] = c.solver.damping;
  s["anderson_depth"] = c.solver.anderson_depth;
  s["fp_tol"] = c.solver.fp_tol;
  s["max_outer"] = c.solver.max_outer;
  s["lin_tol"] = c.solver.lin.tol;
  s["linear"] = c.solver.lin.method == LinearMethod::Jacobi ? "jacobi" : "multigrid";
  s["lin_max_iter"] = c.solver.lin.max_iter;
  j["solver"] = s;
  j["eps_schedule"] = c.solver.eps_schedule;

  if (c.obstacle.enabled) j["obstacle"] = {{"mu", c.obstacle.mu}, {"lambda", c.obstacle.lambda}};

  const auto& ac = c.analysis;
  json a;
  a["delta_abs"] = ac.delta_abs;
  a["delta_rel"] = ac.delta_rel;
  a["separation"] = ac.separation;
  a["ball_regularization"] = ac.ball_regularization;
  a["interfaces"] = ac.interfaces;
  a["fb_condition"] = ac.fb_condition;
  a["mass_balance"] = ac.mass_balance;
  a["decay"] = ac.decay;
  a["gradient_bound"] = ac.gradient_bound;
  a["singular_points"] = ac.singular_points;
  a["radial_crosscheck"] = ac.radial_crosscheck;
  a["threshold_robustness"] = ac.threshold_robustness;
  json probes = json::array();
  for (auto& p : ac.decay_probes) probes.push_back({p.x, p.y});
  a["decay_probes"] = probes;
  a["gradient_radii"] = ac.gradient_radii;
  a["random_probes"] = ac.random_probes;
  j["analysis"] = a;

  j["output"] = {{"dir", c.output.dir}, {"dump_fields", c.output.dump_fields}};
  return j.dump(2) + "\n";
}

double grid_spacing(const ExperimentConfig& c, double eps) {
  if (c.h_over_eps > 0) return std::min(c.h_max, eps / c.h_over_eps);
  return c.domain.h;
}

}  // namespace nlseg
