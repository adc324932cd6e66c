#include "mreg/signal.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mreg/errors.hpp"

namespace mreg {

SpaceTag::SpaceTag(double g) : gamma(g) {
  if (!(g >= -1.0 && g <= 1.0)) throw DomainError("space tag gamma must lie in [-1,1]");
}

Signal::Signal(TimeGrid grid, Eigen::MatrixXcd values, SpaceTag space)
    : grid_(std::move(grid)), values_(std::move(values)), space_(space) {
  if (static_cast<std::size_t>(values_.rows()) != grid_.size())
    throw StructuralError("signal length does not match grid");
  if (values_.cols() < 1) throw StructuralError("signal dimension must be positive");
  if (!values_.allFinite()) throw DataError("signal contains non-finite samples");
}

Signal Signal::zeros(const TimeGrid& grid, Eigen::Index dim, SpaceTag space) {
  return Signal(grid, Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(grid.size()), dim), space);
}

Signal Signal::sample(const TimeGrid& grid, Eigen::Index dim, const std::function<Eigen::VectorXcd(double)>& fn,
                      SpaceTag space) {
  Eigen::MatrixXcd v(static_cast<Eigen::Index>(grid.size()), dim);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    Eigen::VectorXcd x = fn(grid.time(k));
    if (x.size() != dim) throw StructuralError("sampler returned wrong dimension");
    v.row(static_cast<Eigen::Index>(k)) = x.transpose();
  }
  return Signal(grid, std::move(v), space);
}

Signal Signal::scalar(const TimeGrid& grid, const std::function<cplx(double)>& fn) {
  Eigen::MatrixXcd v(static_cast<Eigen::Index>(grid.size()), 1);
  for (std::size_t k = 0; k < grid.size(); ++k) v(static_cast<Eigen::Index>(k), 0) = fn(grid.time(k));
  return Signal(grid, std::move(v));
}

Signal Signal::restricted_to_window() const {
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(values_.rows(), values_.cols());
  const auto i0 = static_cast<Eigen::Index>(grid_.window_first());
  const auto m = static_cast<Eigen::Index>(grid_.window_points());
  v.middleRows(i0, m) = values_.middleRows(i0, m);
  return with_values(std::move(v));
}

Signal operator+(const Signal& a, const Signal& b) {
  if (a.grid() != b.grid() || a.dim() != b.dim()) throw StructuralError("signal shapes differ");
  return a.with_values(a.values() + b.values());
}

Signal operator-(const Signal& a, const Signal& b) {
  if (a.grid() != b.grid() || a.dim() != b.dim()) throw StructuralError("signal shapes differ");
  return a.with_values(a.values() - b.values());
}

cplx l2_inner(const Signal& v, const Signal& w) {
  if (v.grid() != w.grid() || v.dim() != w.dim()) throw StructuralError("signal shapes differ");
  return v.grid().spacing() * (w.values().conjugate().cwiseProduct(v.values())).sum();
}

double l2_norm(const Signal& u) { return std::sqrt(u.grid().spacing()) * u.values().norm(); }

double max_abs(const Signal& u) { return u.values().cwiseAbs().maxCoeff(); }

void write_csv(std::ostream& os, const Signal& u, bool complex_columns) {
  os << "t";
  for (Eigen::Index j = 0; j < u.dim(); ++j) {
    if (complex_columns)
      os << ",u" << j << "_re,u" << j << "_im";
    else
      os << ",u" << j;
  }
  os << '\n' << std::setprecision(17);
  for (std::size_t k = 0; k < u.size(); ++k) {
    os << u.grid().time(k);
    for (Eigen::Index j = 0; j < u.dim(); ++j) {
      const cplx z = u.values()(static_cast<Eigen::Index>(k), j);
      os << ',' << z.real();
      if (complex_columns) os << ',' << z.imag();
    }
    os << '\n';
  }
}

Signal read_csv(std::istream& is, std::optional<Window> window) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("empty signal CSV");
  const bool cplx_cols = line.find("_im") != std::string::npos;
  std::vector<double> ts;
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> r;
    while (std::getline(ss, cell, ',')) r.push_back(std::stod(cell));
    if (r.size() < 2) throw DataError("signal CSV row too short");
    ts.push_back(r[0]);
    rows.emplace_back(r.begin() + 1, r.end());
  }
  if (ts.size() < 2) throw DataError("signal CSV needs at least two rows");
  const std::size_t width = rows.front().size();
  if (cplx_cols && width % 2) throw DataError("odd number of complex columns");
  const double h = ts[1] - ts[0];
  const TimeGrid grid(ts.size(), h * static_cast<double>(ts.size()), window);
  const auto d = static_cast<Eigen::Index>(cplx_cols ? width / 2 : width);
  Eigen::MatrixXcd v(static_cast<Eigen::Index>(ts.size()), d);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].size() != width) throw DataError("ragged signal CSV");
    if (std::abs(ts[k] - grid.time(k)) > 1e-9 * grid.period()) throw DataError("signal CSV times are not uniform");
    for (Eigen::Index j = 0; j < d; ++j)
      v(static_cast<Eigen::Index>(k), j) =
          cplx_cols ? cplx(rows[k][2 * j], rows[k][2 * j + 1]) : cplx(rows[k][static_cast<std::size_t>(j)], 0.0);
  }
  return Signal(grid, std::move(v));
}

}  // namespace mreg
