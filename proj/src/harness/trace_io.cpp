#include "signflow/trace_io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace signflow {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string trace_csv(const RunTrace& trace) {
  std::string out = kTraceHeader;
  out += '\n';
  for (const TraceRecord& r : trace.records) {
    out += std::to_string(r.iter);
    out += ',';
    if (r.f_gap) out += format_double(*r.f_gap);
    out += ',';
    if (r.dist_sq) out += format_double(*r.dist_sq);
    out += ',';
    out += format_double(r.eta);
    out += ',';
    out += format_double(r.grad_l1);
    out += ',';
    out += std::to_string(r.active_size);
    out += ',';
    out += format_double(r.active_curvature);
    out += ',';
    out += std::to_string(r.freezes);
    out += ',';
    out += std::to_string(r.slides);
    out += ',';
    out += std::to_string(r.restarts);
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace signflow
