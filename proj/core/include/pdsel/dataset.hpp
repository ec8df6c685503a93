#pragma once

#include <string>
#include <vector>

#include "pdsel/numerics.hpp"

namespace pdsel {

struct RoleMapping {
  std::string outcome;
  std::string treatment;
  std::vector<std::string> controls;      // ignored if controls_all_others
  bool controls_all_others = false;       // every non-role column is a control
  std::vector<std::string> amelioration;  // names, subset of the controls
};

struct Dataset {
  std::vector<std::string> column_names;  // file header, in order
  std::string outcome_column;
  std::string treatment_column;
  std::vector<std::string> control_columns;
  std::vector<std::string> amelioration_columns;
  Index rows = 0;                 // complete rows kept
  std::size_t rows_dropped = 0;   // rows lost to missing cells
  // Kept rows, columns ordered [outcome, treatment, controls...].
  RealMatrix values;

  RealVector outcome() const { return values.col(0); }
  RealVector treatment() const { return values.col(1); }
  RealMatrix controls() const { return values.rightCols(values.cols() - 2); }
  // Positions of the amelioration columns within the control block.
  std::vector<Index> amelioration_indices() const;
};

// RFC-4180 CSV (comma delimiter, double-quote escaping, LF or CRLF records,
// UTF-8, mandatory header). Empty or non-finite cells in used columns drop the
// row; non-numeric cells are an error naming row and column. Unreadable files,
// malformed records, and fewer than 3 complete rows raise data_error; role
// names missing from the header raise argument_error.
Dataset ingest_csv(const std::string& path, const RoleMapping& roles);

// The named columns only, with the same parsing and row-dropping rules as
// ingest_csv; for commands that need no outcome/treatment roles.
RealMatrix read_csv_columns(const std::string& path,
                            const std::vector<std::string>& names,
                            std::size_t* rows_dropped = nullptr);

// Matrix as CSV with shortest-round-trip number formatting, so re-ingesting
// reproduces the values bit for bit.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const RealMatrix& values);

// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double value);

}  // namespace pdsel
