#include "json_text.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "psguard/error.hpp"

namespace psguard::detail {
namespace {

bool is_scalar(const ojson& v) { return !v.is_array() && !v.is_object(); }

void write_scalar(const ojson& v, const char* float_format, std::string& out) {
  if (v.is_number_float()) {
    double d = v.get<double>();
    if (!std::isfinite(d)) {
      out += "null";
      return;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, float_format, d);
    std::string s(buf);
    if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
    out += s;
  } else {
    out += v.dump();
  }
}

void write(const ojson& v, const char* float_format, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(depth + 1) * 2, ' ');
  const std::string close_pad(static_cast<std::size_t>(depth) * 2, ' ');
  if (v.is_object()) {
    if (v.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (!first) out += ",\n";
      first = false;
      out += pad + ojson(it.key()).dump() + ": ";
      write(it.value(), float_format, depth + 1, out);
    }
    out += "\n" + close_pad + "}";
  } else if (v.is_array()) {
    if (v.empty()) {
      out += "[]";
      return;
    }
    bool flat = true;
    for (const auto& e : v) flat = flat && is_scalar(e);
    if (flat) {
      out += "[";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        write_scalar(v[i], float_format, out);
      }
      out += "]";
      return;
    }
    out += "[\n";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ",\n";
      out += pad;
      write(v[i], float_format, depth + 1, out);
    }
    out += "\n" + close_pad + "]";
  } else {
    write_scalar(v, float_format, out);
  }
}

}  // namespace

std::string dump_json(const ojson& value, const char* float_format) {
  std::string out;
  write(value, float_format, 0, out);
  out += "\n";
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents,
                       const char* module) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Data, module, "cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorKind::Data, module, "write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::Data, module, "cannot move output into place at '" + path.string() + "'");
  }
}

std::string read_file(const std::filesystem::path& path, const char* module) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Data, module, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace psguard::detail
