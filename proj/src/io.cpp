#include "nlseg/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "nlseg/errors.hpp"

namespace nlseg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int k = 0; k < 8; ++k) r |= ((v >> (8 * k)) & 0xffu) << (8 * (7 - k));
  return r;
}

void write_atomic(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::IoError, "write failed for " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::IoError, "cannot rename " + tmp + ": " + ec.message());
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_text(const std::string& path, const std::string& text) { write_atomic(path, text); }

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool file_exists(const std::string& path) { return fs::exists(path); }

void make_dirs(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + path + ": " + ec.message());
}

void write_field(const std::string& base, const Field& f, const FieldMeta& meta) {
  const Grid& g = meta.grid;
  if (f.size() != g.size()) fail(ErrorCode::InvalidArgument, "field size does not match its grid");
  std::string bytes(f.size() * 8, '\0');
  for (std::size_t k = 0; k < f.size(); ++k) {
    std::uint64_t v = to_le(std::bit_cast<std::uint64_t>(f[k]));
    std::memcpy(&bytes[8 * k], &v, 8);
  }
  json j;
  j["name"] = meta.name;
  j["nx"] = g.nx;
  j["ny"] = g.ny;
  j["h"] = g.h;
  j["origin"] = {g.x0, g.y0};
  j["mirror_x"] = g.mirror_x;
  j["mirror_y"] = g.mirror_y;
  j["epsilon"] = meta.epsilon;
  j["population"] = meta.population;
  j["dtype"] = "float64-le";
  j["order"] = "row-major";
  if (meta.iterations >= 0) j["iterations"] = meta.iterations;
  write_atomic(base + ".bin", bytes);
  write_atomic(base + ".json", j.dump(2) + "\n");
}

Field read_field(const std::string& base, FieldMeta* meta) {
  json j;
  try {
    j = json::parse(read_text(base + ".json"));
  } catch (const json::exception& e) {
    fail(ErrorCode::IoError, base + ".json: " + e.what());
  }
  FieldMeta m;
  try {
    m.name = j.value("name", "");
    m.grid.nx = j.at("nx").get<int>();
    m.grid.ny = j.at("ny").get<int>();
    m.grid.h = j.at("h").get<double>();
    m.grid.x0 = j.at("origin").at(0).get<double>();
    m.grid.y0 = j.at("origin").at(1).get<double>();
    m.grid.mirror_x = j.value("mirror_x", false);
    m.grid.mirror_y = j.value("mirror_y", false);
    m.epsilon = j.value("epsilon", 0.0);
    m.population = j.value("population", 0);
    m.iterations = j.value("iterations", -1);
  } catch (const json::exception& e) {
    fail(ErrorCode::IoError, base + ".json: " + e.what());
  }
  const std::string bytes = read_text(base + ".bin");
  if (m.grid.nx <= 0 || m.grid.ny <= 0 || bytes.size() != m.grid.size() * 8)
    fail(ErrorCode::IoError, base + ".bin: size does not match the header");
  Field f(m.grid.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    std::uint64_t v;
    std::memcpy(&v, &bytes[8 * k], 8);
    f[k] = std::bit_cast<double>(to_le(v));
  }
  if (meta) *meta = m;
  return f;
}

void write_pgm(const std::string& path, const Mask& m, const Grid& g) {
  if (m.size() != g.size()) fail(ErrorCode::InvalidArgument, "mask size does not match its grid");
  std::string out = "P5\n" + std::to_string(g.nx) + " " + std::to_string(g.ny) + "\n255\n";
  out.reserve(out.size() + m.size());
  for (int j = g.ny - 1; j >= 0; --j)
    for (int i = 0; i < g.nx; ++i) out.push_back(m[g.idx(i, j)] ? static_cast<char>(255) : 0);
  write_atomic(path, out);
}

void write_interface_csv(const std::string& path, const InterfaceSet& s) {
  std::string out = "curve_id,x,y,nx,ny,kappa,u_nu\n";
  for (std::size_t c = 0; c < s.curves.size(); ++c)
    for (auto& v : s.curves[c].v) {
      out += std::to_string(c);
      for (double d : {v.x.x, v.x.y, v.n.x, v.n.y, v.kappa, v.u_nu}) {
        out += ',';
        out += format_double(d);
      }
      out += '\n';
    }
  write_atomic(path, out);
}

}  // namespace nlseg
