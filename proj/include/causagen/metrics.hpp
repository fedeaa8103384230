#pragma once

#include "causagen/association.hpp"
#include "causagen/binning.hpp"
#include "causagen/table.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace causagen {

// Frobenius norm of the difference of the two mixed association matrices.
double cmd(const Table& real, const Table& synth);

// Column codes for k-MTVD: categorical index, or the bin under edges taken
// from `reference`.
Eigen::MatrixXi discretize(const Table& t, const Table& reference, int bins);

// TVD between the joint histograms of columns (i, j).
double pair_tvd(const Eigen::MatrixXi& real_codes, const Eigen::MatrixXi& synth_codes,
                Eigen::Index i, Eigen::Index j);

// Mean pairwise TVD over all unordered column pairs (single-column tables
// fall back to the marginal TVD).
double kmtvd(const Table& real, const Table& synth, int bins = 20);

// Per-column scale for Gower distances; zero for constant numeric columns.
struct GowerScale {
  std::vector<bool> categorical;
  Eigen::VectorXd range;
};

GowerScale gower_scale(const Table& real, const Table& synth);

double gower(std::span<const double> u, std::span<const double> v, const GowerScale& scale);

// Nearest-neighbour adversarial accuracy with Gower distances. Within-set
// neighbours exclude the point itself; an indicator fires only on strict
// inequality, so an exact copy scores 0.
double nnaa(const Table& real, const Table& synth, unsigned threads = 1);

struct SpuriousEntry {
  std::string a;
  std::string b;
  std::optional<double> pearson;
};

std::vector<SpuriousEntry> spurious_report(
    const Table& t, const std::vector<std::pair<std::string, std::string>>& pairs);

enum class ArmAssignment {
  exact,    // treatment value must equal x0 or x1
  nearest,  // each row joins the arm whose value is closest (ties to x0)
};

// mean(outcome | arm x1) - mean(outcome | arm x0). Throws DataError when an
// arm is empty.
double ate_from_table(const Table& t, std::string_view treatment, std::string_view outcome,
                      double x0, double x1, ArmAssignment arms = ArmAssignment::exact);

inline double delta_ate(double a, double b) { return std::abs(a - b); }

struct MetricReport {
  double cmd = 0.0;
  double kmtvd = 0.0;
  double nnaa = 0.0;
  std::vector<SpuriousEntry> spurious;
};

MetricReport evaluate(const Table& real, const Table& synth,
                      const std::vector<std::pair<std::string, std::string>>& spurious_pairs = {},
                      unsigned threads = 1);

}  // namespace causagen
