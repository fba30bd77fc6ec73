#include <cstdio>
#include <filesystem>
#include <fstream>

#include "qvi/cli/experiment.hpp"

namespace qvi::cli {

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

std::string trace_to_csv(const Trace& trace) {
  std::string out = "k,residual,dist_ref,step_norm\n";
  for (const TraceRow& r : trace.rows) {
    append_number(out, r.k);
    out += ',';
    append_number(out, r.residual);
    out += ',';
    append_number(out, r.dist_ref);
    out += ',';
    append_number(out, r.step_norm);
    out += '\n';
  }
  return out;
}

std::string trace_to_json(const Trace& trace) {
  nlohmann::json rows = nlohmann::json::array();
  for (const TraceRow& r : trace.rows)
    rows.push_back({{"k", r.k}, {"residual", r.residual}, {"dist_ref", r.dist_ref},
                    {"step_norm", r.step_norm}});
  return rows.dump(1) + "\n";
}

Trace trace_from_json(const std::string& text) {
  const nlohmann::json rows = nlohmann::json::parse(text);
  if (!rows.is_array()) throw Error("trace JSON must be an array");
  Trace t;
  for (const auto& r : rows)
    t.push(r.at("k").get<double>(), r.at("residual").get<double>(), r.at("dist_ref").get<double>(),
           r.at("step_norm").get<double>());
  return t;
}

void write_trace(const Trace& trace, const std::string& path, TraceFormat format) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open trace file for writing: " + path);
  out << (format == TraceFormat::Csv ? trace_to_csv(trace) : trace_to_json(trace));
  out.flush();
  if (!out) throw Error("failed writing trace file: " + path);
}

std::string suffixed_path(const std::string& path, const std::string& suffix) {
  const std::filesystem::path p(path);
  std::filesystem::path out = p.parent_path() / (p.stem().string() + "_" + suffix + p.extension().string());
  return out.string();
}

}  // namespace qvi::cli
