#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

#include "reflest/control.hpp"
#include "reflest/costcome.hpp"
#include "reflest/filtering.hpp"
#include "reflest/grid.hpp"
#include "reflest/skorokhod.hpp"

namespace reflest::tableio {

/// File-system failures (unwritable path, truncated file, malformed content).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// 17-significant-digit decimal rendering ('.' separator, lowercase exponent).
/// Doubles survive a print/parse round trip bit-exactly.
std::string format_real(double v);

/// Field CSV: header "t,x,value", one row per node, time-major (all rows of
/// time level 0, then level 1, ...). Values at 17 significant digits.
void write_field_csv(const ScalarField& field, const std::string& path);

/// Inverse of write_field_csv. Throws IoError on malformed input.
ScalarField read_field_csv(const std::string& path);

/// Compact binary table. Layout, little-endian regardless of host:
///   bytes 0..7    u64  number of time levels (rows)
///   bytes 8..15   u64  number of space nodes (columns)
///   then rows x cols IEEE-754 binary64 values, row-major, the time level
///   varying slowest. Axes are not stored; the CSV twin carries them.
void write_field_bin(const ScalarField& field, const std::string& path);

/// Values from write_field_bin, returned in ScalarField orientation
/// (space index x time index).
Eigen::MatrixXd read_field_bin(const std::string& path);

/// Estimator trace CSV: header "t,xhat,value,multiplicity" where value is the
/// cost-to-come at (xhat, t) and multiplicity is 2 on flagged ties, else 1.
void write_trace_csv(const costcome::TraceResult& trace, const ScalarField& value,
                     const std::string& path);

/// Ensemble CSV: header "t,mean,var,ess".
void write_ensemble_csv(const filtering::EnsembleSummary& ensemble,
                        const std::string& path);

/// Boundary discrepancy CSV: header "x,t,V_constrained,W,V_penalized,gap".
void write_boundary_csv(const control::BoundaryTable& table,
                        const std::string& path);

/// Skorokhod path CSV: header "t,x,delta,unconstrained" (the Figure 1 curves);
/// the last column is empty when the solution carries no explicit forcing.
void write_path_csv(const skorokhod::SkorokhodSolution& sol,
                    const std::string& path);

}  // namespace reflest::tableio
