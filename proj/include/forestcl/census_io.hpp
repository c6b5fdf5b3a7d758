#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "forestcl/geometry.hpp"

namespace forestcl {

// One CSV row of a census table. Columns:
//   tree_id,species,x,y,mark,census_index
// An empty mark field means "missing"; it is replaced by 1 only when the
// caller allows it (mark-free death models).
struct CensusRow {
  std::int64_t tree_id = 0;
  int species = 1;
  double x = 0, y = 0;
  double mark = 1.0;
  bool mark_missing = false;
  int census_index = 0;
};

struct CensusTable {
  std::vector<CensusRow> rows;

  static CensusTable read_csv(std::istream& in);
  static CensusTable read_csv_file(const std::string& path);
  void write_csv(std::ostream& out) const;
  void write_csv_file(const std::string& path) const;
};

// Census series reassembled from a table: census[k][l] is the pattern of
// species l+1 at census k, with recruits/deaths derived by tree id.
struct IngestResult {
  std::vector<std::vector<PointPattern>> census;
  std::vector<std::vector<PointPattern>> recruits;  // [k][l], k >= 1; [0] empty
  std::vector<std::vector<PointPattern>> deaths;
  int n_species = 0;
  std::string report;  // per-census counts, human readable
};

IngestResult ingest_census(const CensusTable& table, const Window& window,
                           bool allow_missing_marks);

// Flatten a census series back to a table (the inverse of ingest_census
// up to row order).
CensusTable to_table(const std::vector<std::vector<PointPattern>>& census);

}  // namespace forestcl
