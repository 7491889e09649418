#include "recursep/csv_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "recursep/errors.hpp"

namespace recursep {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

std::string strip(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void line_error(std::size_t line_no, const std::string& what) {
  throw DataError("line " + std::to_string(line_no) + ": " + what);
}

double parse_time(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) line_error(line_no, "malformed time value '" + s + "'");
    if (v < 0.0) line_error(line_no, "negative time");
    return v;
  } catch (const DataError&) {
    throw;
  } catch (const std::exception&) {
    line_error(line_no, "malformed time value '" + s + "'");
  }
}

struct PendingSubject {
  int arm = -1;
  std::vector<double> event_times;
  std::optional<double> death_time;
  std::optional<double> censor_time;
  std::size_t first_line = 0;
};

}  // namespace

std::vector<RawRecord> parse_long_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file: " + path);

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw DataError("empty input file: " + path);
  ++line_no;
  std::vector<std::string> header = split_csv_line(strip(line));
  for (std::string& h : header) h = strip(h);
  int col_id = -1, col_arm = -1, col_type = -1, col_time = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "id") col_id = static_cast<int>(c);
    else if (header[c] == "arm") col_arm = static_cast<int>(c);
    else if (header[c] == "type") col_type = static_cast<int>(c);
    else if (header[c] == "time") col_time = static_cast<int>(c);
    else line_error(line_no, "unknown column '" + header[c] + "'");
  }
  if (col_id < 0 || col_arm < 0 || col_type < 0 || col_time < 0) {
    line_error(line_no, "header must name the columns id, arm, type, time");
  }

  std::map<std::string, PendingSubject> table;
  std::vector<std::string> order;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = strip(line);
    if (stripped.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(stripped);
    if (fields.size() != header.size()) {
      line_error(line_no, "expected " + std::to_string(header.size()) +
                              " fields, found " + std::to_string(fields.size()));
    }
    const std::string id = strip(fields[col_id]);
    if (id.empty()) line_error(line_no, "empty subject id");
    const std::string arm_s = strip(fields[col_arm]);
    if (arm_s != "0" && arm_s != "1") {
      line_error(line_no, "arm must be 0 or 1, found '" + arm_s + "'");
    }
    const int arm = arm_s == "1" ? 1 : 0;
    const std::string type = strip(fields[col_type]);
    const double time = parse_time(strip(fields[col_time]), line_no);

    auto [it, fresh] = table.try_emplace(id);
    PendingSubject& p = it->second;
    if (fresh) {
      p.arm = arm;
      p.first_line = line_no;
      order.push_back(id);
    } else if (p.arm != arm) {
      line_error(line_no, "subject " + id + " changes arm");
    }
    if (type == "event") {
      p.event_times.push_back(time);
    } else if (type == "death") {
      if (p.death_time || p.censor_time) {
        line_error(line_no, "subject " + id + " has more than one exit row");
      }
      p.death_time = time;
    } else if (type == "censor") {
      if (p.death_time || p.censor_time) {
        line_error(line_no, "subject " + id + " has more than one exit row");
      }
      p.censor_time = time;
    } else {
      line_error(line_no, "unknown record type '" + type + "'");
    }
  }

  std::vector<RawRecord> records;
  records.reserve(order.size());
  std::vector<std::string> events_after_death;
  for (const std::string& id : order) {
    PendingSubject& p = table[id];
    if (!p.death_time && !p.censor_time) {
      throw DataError("subject " + id + " has no death or censor row");
    }
    const double exit_time = p.death_time ? *p.death_time : *p.censor_time;
    for (double u : p.event_times) {
      if (p.death_time ? u >= exit_time : u > exit_time) {
        events_after_death.push_back(id);
        break;
      }
    }
    RawRecord r;
    r.id = id;
    r.arm = p.arm;
    r.event_times = std::move(p.event_times);
    std::sort(r.event_times.begin(), r.event_times.end());
    r.death_time = p.death_time;
    r.censor_time = p.censor_time;
    records.push_back(std::move(r));
  }
  if (!events_after_death.empty()) {
    std::string ids;
    for (const std::string& id : events_after_death) {
      if (!ids.empty()) ids += ", ";
      ids += id;
    }
    throw DataError("events at or after the exit time for subjects: " + ids);
  }
  if (records.empty()) throw DataError("input file has no subjects: " + path);
  return records;
}

Dataset ingest_csv(const std::string& path, const GridSpec& spec) {
  const std::vector<RawRecord> records = parse_long_csv(path);
  if (spec.explicit_grid) {
    return discretize(records, *spec.explicit_grid);
  }
  double max_time = 0.0;
  for (const RawRecord& r : records) {
    max_time = std::max(max_time,
                        r.death_time ? *r.death_time : *r.censor_time);
  }
  if (!(max_time > 0.0)) throw DataError("no positive follow-up time in input");
  return discretize(records,
                    TimeGrid::uniform(spec.default_intervals, max_time));
}

void export_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  const TimeGrid& grid = dataset.grid();
  out << "id,arm,type,time\n";
  for (const SubjectHistory& s : dataset.subjects()) {
    for (int k = 1; k <= dataset.intervals(); ++k) {
      for (int c = 0; c < s.event_counts[k - 1]; ++c) {
        out << s.id << ',' << s.arm << ",event," << format_number(grid.end_of(k))
            << '\n';
      }
    }
    if (s.death_interval) {
      out << s.id << ',' << s.arm << ",death,"
          << format_number(grid.end_of(*s.death_interval)) << '\n';
    } else if (s.censor_interval) {
      const int c = *s.censor_interval;
      const double mid = 0.5 * (grid.start_of(c) + grid.end_of(c));
      out << s.id << ',' << s.arm << ",censor," << format_number(mid) << '\n';
    } else {
      out << s.id << ',' << s.arm << ",censor," << format_number(grid.tau())
          << '\n';
    }
  }
}

void write_curve_csv(const StepCurve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "time,value\n";
  for (int k = 1; k <= curve.grid.intervals(); ++k) {
    out << format_number(curve.grid.end_of(k)) << ','
        << format_number(curve.at(k)) << '\n';
  }
}

}  // namespace recursep
