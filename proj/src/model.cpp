#include "covpost/model.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "covpost/io.hpp"

namespace covpost {

void Dataset::validate() const {
  if (Y.rows() < 2 || Y.cols() < 1) {
    throw ParameterOutOfRange("dataset needs n >= 2 rows and q >= 1 response columns");
  }
  if (!Y.allFinite()) throw ParameterOutOfRange("dataset Y has non-finite entries");
  if (X) {
    if (X->rows() != Y.rows()) {
      throw DimensionMismatch("design has " + std::to_string(X->rows()) + " rows, responses have " +
                              std::to_string(Y.rows()));
    }
    if (X->cols() < 1) throw DimensionMismatch("design must have at least one column");
    if (!X->allFinite()) throw ParameterOutOfRange("dataset X has non-finite entries");
  }
}

SufficientStats compute_stats(const Dataset& d, double lambda) {
  d.validate();
  const Index n = d.n(), q = d.q();

  if (!d.X) {
    SufficientStats s{std::nullopt, Matrix(0, q), PDMatrix(d.Y.transpose() * d.Y), {}, {}, {}};
    s.lambda = lambda;
    s.n = n;
    s.q = q;
    return s;
  }

  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterOutOfRange("lambda must be finite and >= 0");
  const Matrix& X = *d.X;
  const Index p = X.cols();
  const Matrix xtx = symmetrize(X.transpose() * X);
  Matrix x_lambda = xtx;
  x_lambda.diagonal().array() += lambda;

  std::optional<PDMatrix> xl;
  try {
    xl.emplace(x_lambda);
  } catch (const NotPositiveDefinite&) {
    throw SingularDesign("XᵀX + λI is singular; use lambda > 0 or a full-rank design");
  }
  const Matrix xty = X.transpose() * d.Y;
  const Matrix b_tilde = xl->solve(xty);
  // Yᵀ(I − X X_λ⁻¹ Xᵀ)Y written as a sum of two PSD terms.
  const Matrix resid = d.Y - X * b_tilde;
  const Matrix s_y = resid.transpose() * resid + lambda * b_tilde.transpose() * b_tilde;

  SufficientStats s{std::move(xl), b_tilde, PDMatrix(s_y), {}, {}, {}};
  s.XtX = xtx;
  s.lambda = lambda;
  s.n = n;
  s.p = p;
  s.q = q;

  try {
    const PDMatrix g(xtx);
    const Matrix b_ls = g.solve(xty);
    const Matrix r = d.Y - X * b_ls;
    s.B_ls = b_ls;
    s.W_n = symmetrize(r.transpose() * r);
  } catch (const NotPositiveDefinite&) {
    // Rank-deficient design: least-squares quantities stay empty.
  }
  return s;
}

bool woodbury_check(const SufficientStats& s) {
  if (s.p == 0 || !s.XtX) throw SingularDesign("woodbury_check: no design matrix");
  if (!s.B_ls || !s.W_n) throw SingularDesign("woodbury_check: XᵀX is singular");
  if (!(s.lambda > 0.0)) throw PreconditionError("woodbury_check: lambda must be positive");

  const PDMatrix xtx(*s.XtX);
  Matrix middle = xtx.inverse();
  middle.diagonal().array() += 1.0 / s.lambda;
  const PDMatrix m(middle);
  const Matrix rhs = *s.W_n + s.B_ls->transpose() * m.solve(*s.B_ls);
  const Matrix& lhs = s.S_Y.matrix();
  const double scale = std::max(lhs.norm(), rhs.norm());
  return (lhs - rhs).norm() <= 1e-8 * scale;
}

double loglik(const Dataset& d, const Matrix& B, const PDMatrix& sigma) {
  if (sigma.dim() != d.q()) throw DimensionMismatch("loglik: Sigma must be q x q");
  Matrix resid = d.Y;
  if (d.X) {
    if (B.rows() != d.p() || B.cols() != d.q()) throw DimensionMismatch("loglik: B must be p x q");
    resid -= *d.X * B;
  }
  const double n = static_cast<double>(d.n()), q = static_cast<double>(d.q());
  // tr(Σ⁻¹ RᵀR) = ‖L⁻¹Rᵀ‖²_F
  const Matrix z = sigma.cholesky_factor().triangularView<Eigen::Lower>().solve(resid.transpose());
  return -0.5 * n * q * std::log(2.0 * std::numbers::pi) - 0.5 * n * sigma.logdet() - 0.5 * z.squaredNorm();
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("line 1: missing header");
  const auto header = split_csv_line(line);
  Index q = 0, p = 0;
  bool in_x = false;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string& h = header[i];
    const std::string expected_y = "y" + std::to_string(q + 1);
    const std::string expected_x = "x" + std::to_string(p + 1);
    if (!in_x && h == expected_y) {
      ++q;
    } else if (h == expected_x && q > 0) {
      in_x = true;
      ++p;
    } else {
      throw ParseError("line 1: unexpected header column '" + h + "' (want y1..yq[,x1..xp])");
    }
  }
  if (q == 0) throw ParseError("line 1: no response columns");

  std::vector<double> values;
  std::size_t line_no = 1;
  Index rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (static_cast<Index>(fields.size()) != q + p) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(q + p) +
                       " fields, found " + std::to_string(fields.size()));
    }
    for (const auto& f : fields) values.push_back(parse_double(f, "line " + std::to_string(line_no)));
    ++rows;
  }
  if (rows < 2) throw ParseError("dataset needs at least 2 data rows");

  Dataset d;
  d.Y.resize(rows, q);
  if (p > 0) d.X = Matrix(rows, p);
  for (Index r = 0; r < rows; ++r) {
    for (Index j = 0; j < q; ++j) d.Y(r, j) = values[static_cast<std::size_t>(r * (q + p) + j)];
    for (Index j = 0; j < p; ++j) (*d.X)(r, j) = values[static_cast<std::size_t>(r * (q + p) + q + j)];
  }
  return d;
}

void write_dataset_csv(std::ostream& out, const Dataset& d) {
  for (Index j = 0; j < d.q(); ++j) out << (j ? "," : "") << 'y' << j + 1;
  for (Index j = 0; j < d.p(); ++j) out << ",x" << j + 1;
  out << '\n';
  for (Index r = 0; r < d.n(); ++r) {
    for (Index j = 0; j < d.q(); ++j) out << (j ? "," : "") << format_double(d.Y(r, j));
    for (Index j = 0; j < d.p(); ++j) out << ',' << format_double((*d.X)(r, j));
    out << '\n';
  }
}

}  // namespace covpost
