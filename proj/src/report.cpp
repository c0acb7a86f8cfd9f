#include "ergostab/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "ergostab/errors.hpp"

namespace ergostab {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string quantity(const std::string& desc) {
  const auto at = desc.find('@');
  return at == std::string::npos ? desc : desc.substr(0, at);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

bool Report::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
}

void Report::check(std::string name, bool ok, std::string detail) {
  verdicts.push_back(Verdict{std::move(name), ok, std::move(detail)});
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::ostream& os, const Report& report) {
  os << "scenario,epsilon_index,epsilon_desc,horizon,value,stderr,verdict\n";
  for (const CurveRow& r : report.rows.rows()) {
    os << csv_field(report.scenario) << ',' << r.epsilon_index << ',' << csv_field(r.epsilon_desc) << ','
       << r.horizon << ',' << format_double(r.value) << ',' << format_double(r.standard_error) << ','
       << csv_field(r.verdict) << '\n';
  }
}

void write_json(std::ostream& os, const Report& report) {
  Json j = Json::object();
  j["scenario"] = report.scenario;
  j["config_hash"] = config_hash(report.config);
  j["config"] = to_json(report.config);
  j["seed"] = report.config.seed;
  Json timings = Json::object();
  for (const auto& [name, seconds] : report.timings) timings[name] = seconds;
  j["timings"] = std::move(timings);
  Json verdicts = Json::array();
  for (const Verdict& v : report.verdicts) {
    verdicts.push_back(Json{{"name", v.name}, {"passed", v.passed}, {"detail", v.detail}});
  }
  j["verdicts"] = std::move(verdicts);
  Json rows = Json::array();
  for (const CurveRow& r : report.rows.rows()) {
    rows.push_back(Json{{"epsilon_index", r.epsilon_index},
                        {"epsilon_desc", r.epsilon_desc},
                        {"horizon", r.horizon},
                        {"value", r.value},
                        {"stderr", r.standard_error},
                        {"verdict", r.verdict}});
  }
  j["rows"] = std::move(rows);
  os << j.dump(2) << '\n';
}

void write_plot_script(std::ostream& os, const Report& report) {
  std::vector<std::string> quantities;
  std::set<std::string> seen;
  for (const CurveRow& r : report.rows.rows()) {
    const std::string q = quantity(r.epsilon_desc);
    if (seen.insert(q).second) quantities.push_back(q);
  }
  const std::string csv = report.scenario + ".csv";
  os << "# gnuplot script for " << csv << "\n";
  os << "set datafile separator ','\n";
  os << "set terminal pngcairo size 800,600\n";
  os << "set key outside\n";
  os << "set xlabel 'epsilon_index'\n";
  for (const std::string& q : quantities) {
    os << "set output '" << report.scenario << "_" << q << ".png'\n";
    os << "set title '" << report.scenario << ": " << q << "'\n";
    os << "plot '" << csv << "' every ::1 using 2:(strstrt(strcol(3), '" << q << "@') == 1 || strcol(3) eq '" << q
       << "' ? $5 : 1/0):6 with yerrorbars title '" << q << "'\n";
  }
}

void write_summary(std::ostream& os, const Report& report) {
  os << report.scenario << " (seed " << report.config.seed << ", config " << config_hash(report.config) << ")\n";
  for (const Verdict& v : report.verdicts) {
    os << "  " << (v.passed ? "PASS " : "FAIL ") << v.name << ": " << v.detail << "\n";
  }
  os << "  " << (report.passed() ? "all assertions passed" : "assertion failures") << "\n";
}

std::vector<std::filesystem::path> write_outputs(const Report& report, const std::filesystem::path& dir,
                                                 OutputFormat format) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& name, const std::string& content) {
    const auto path = dir / name;
    write_file(path, content);
    written.push_back(path);
  };
  std::ostringstream body;
  if (format == OutputFormat::csv) {
    write_csv(body, report);
    emit(report.scenario + ".csv", body.str());
    std::ostringstream plot;
    write_plot_script(plot, report);
    emit(report.scenario + ".plot", plot.str());
  } else {
    write_json(body, report);
    emit(report.scenario + ".json", body.str());
  }
  emit(report.scenario + ".config.json", serialize_config(report.config));
  return written;
}

}  // namespace ergostab
