#include "forestcl/census_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "forestcl/errors.hpp"

namespace forestcl {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

const char* kHeader = "tree_id,species,x,y,mark,census_index";

double parse_double(const std::string& s, const char* what, std::size_t row) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("census csv row " + std::to_string(row) + ": bad " +
                    what + " value '" + s + "'");
  }
}

std::int64_t parse_int(const std::string& s, const char* what,
                       std::size_t row) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("census csv row " + std::to_string(row) + ": bad " +
                    what + " value '" + s + "'");
  }
}

}  // namespace

CensusTable CensusTable::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("census csv: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader)
    throw DataError("census csv: header must be '" + std::string(kHeader) +
                    "', got '" + line + "'");
  CensusTable t;
  std::size_t rowno = 1;  // header is row 1
  while (std::getline(in, line)) {
    ++rowno;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv(line);
    if (f.size() != 6)
      throw DataError("census csv row " + std::to_string(rowno) +
                      ": expected 6 fields, got " + std::to_string(f.size()));
    CensusRow r;
    r.tree_id = parse_int(f[0], "tree_id", rowno);
    r.species = static_cast<int>(parse_int(f[1], "species", rowno));
    r.x = parse_double(f[2], "x", rowno);
    r.y = parse_double(f[3], "y", rowno);
    if (f[4].empty()) {
      r.mark_missing = true;
      r.mark = 1.0;
    } else {
      r.mark = parse_double(f[4], "mark", rowno);
    }
    r.census_index = static_cast<int>(parse_int(f[5], "census_index", rowno));
    if (r.species < 1)
      throw DataError("census csv row " + std::to_string(rowno) +
                      ": species must be >= 1");
    if (r.census_index < 0)
      throw DataError("census csv row " + std::to_string(rowno) +
                      ": census_index must be >= 0");
    t.rows.push_back(r);
  }
  return t;
}

CensusTable CensusTable::read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open census csv '" + path + "'");
  return read_csv(in);
}

void CensusTable::write_csv(std::ostream& out) const {
  out << kHeader << "\n";
  char buf[64];
  for (const auto& r : rows) {
    out << r.tree_id << ',' << r.species << ',';
    std::snprintf(buf, sizeof buf, "%.17g", r.x);
    out << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", r.y);
    out << buf << ',';
    if (r.mark_missing) {
      out << ',';
    } else {
      std::snprintf(buf, sizeof buf, "%.17g", r.mark);
      out << buf << ',';
    }
    out << r.census_index << "\n";
  }
}

void CensusTable::write_csv_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write census csv '" + path + "'");
  write_csv(out);
}

IngestResult ingest_census(const CensusTable& table, const Window& window,
                           bool allow_missing_marks) {
  if (table.rows.empty()) throw DataError("ingest: no census rows");

  int K = 0, n_species = 0;
  for (const auto& r : table.rows) {
    K = std::max(K, r.census_index);
    n_species = std::max(n_species, r.species);
  }

  // Validate before building patterns: duplicates with row numbers,
  // out-of-window points listed together.
  {
    std::map<std::pair<std::int64_t, int>, std::size_t> seen;
    std::ostringstream outside;
    int n_outside = 0;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const auto& r = table.rows[i];
      const std::size_t rowno = i + 2;  // 1-based, after header
      auto [it, fresh] = seen.emplace(std::make_pair(r.tree_id,
                                                     r.census_index), rowno);
      if (!fresh)
        throw DataError("ingest: duplicate (tree_id, census_index) = (" +
                        std::to_string(r.tree_id) + ", " +
                        std::to_string(r.census_index) + ") at row " +
                        std::to_string(rowno) + " (first seen at row " +
                        std::to_string(it->second) + ")");
      if (!window.contains(r.x, r.y)) {
        ++n_outside;
        if (n_outside <= 20)
          outside << "\n  row " << rowno << ": tree " << r.tree_id << " at ("
                  << r.x << ", " << r.y << ")";
      }
      if (r.mark_missing && !allow_missing_marks)
        throw DataError("ingest: missing mark at row " +
                        std::to_string(rowno) +
                        " but the model requires marks");
    }
    if (n_outside > 0)
      throw DataError("ingest: " + std::to_string(n_outside) +
                      " point(s) outside the window:" + outside.str());
  }

  std::vector<std::vector<std::vector<MarkedPoint>>> buckets(
      K + 1, std::vector<std::vector<MarkedPoint>>(n_species));
  for (const auto& r : table.rows) {
    MarkedPoint p;
    p.id = r.tree_id;
    p.u = {r.x, r.y};
    p.m = r.mark;
    p.species = r.species;
    buckets[r.census_index][r.species - 1].push_back(p);
  }

  IngestResult out;
  out.n_species = n_species;
  out.census.resize(K + 1);
  out.recruits.resize(K + 1);
  out.deaths.resize(K + 1);
  std::ostringstream report;
  for (int k = 0; k <= K; ++k) {
    for (int l = 0; l < n_species; ++l)
      out.census[k].emplace_back(std::move(buckets[k][l]), window);
    report << "census " << k << ":";
    for (int l = 0; l < n_species; ++l) {
      report << " sp" << (l + 1) << " n=" << out.census[k][l].size();
      if (k > 0) {
        SetDifference d =
            set_difference(out.census[k][l], out.census[k - 1][l]);
        report << " recruits=" << d.recruits.size()
               << " deaths=" << d.deaths.size();
        out.recruits[k].push_back(std::move(d.recruits));
        out.deaths[k].push_back(std::move(d.deaths));
      }
    }
    report << "\n";
  }
  out.report = report.str();
  return out;
}

CensusTable to_table(const std::vector<std::vector<PointPattern>>& census) {
  CensusTable t;
  for (std::size_t k = 0; k < census.size(); ++k) {
    for (std::size_t l = 0; l < census[k].size(); ++l) {
      for (const auto& p : census[k][l].points()) {
        CensusRow r;
        r.tree_id = p.id;
        r.species = static_cast<int>(l + 1);
        r.x = p.u.x();
        r.y = p.u.y();
        r.mark = p.m;
        r.census_index = static_cast<int>(k);
        t.rows.push_back(r);
      }
    }
  }
  return t;
}

}  // namespace forestcl
