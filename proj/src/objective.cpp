#include "embedfit/objective.hpp"

#include <algorithm>
#include <cmath>

#include "embedfit/error.hpp"

namespace embedfit {
namespace {

// d cos(a, w) / dw for a fixed, with |a| and |w| supplied.
void accumulate_cos_grad(std::span<const double> a, double a_norm, std::span<const double> w,
                         double w_norm, double weight, Vec& out) {
  double ab = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) ab += a[i] * w[i];
  const double cos = ab / (a_norm * w_norm);
  for (std::size_t i = 0; i < w.size(); ++i) {
    out[i] += weight * (a[i] / (a_norm * w_norm) - cos * w[i] / (w_norm * w_norm));
  }
}

double raw_cos(std::span<const double> a, double a_norm, std::span<const double> w, double w_norm) {
  double ab = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) ab += a[i] * w[i];
  return ab / (a_norm * w_norm);
}

Vec lift(const SubspacePart& part, const Vec& coords) {
  Vec out(part.dim, 0.0);
  for (std::size_t m = 0; m < part.size(); ++m) {
    for (std::size_t c = 0; c < part.dim; ++c) out[c] += part.components[m][c] * coords[m];
  }
  return out;
}

}  // namespace

LossValue loss_img_align(std::span<const double> z, const EmbeddingSet& exemplars) {
  if (exemplars.empty()) throw Error(ErrorCode::EmptySet, "no exemplar images");
  require_same_dim(z.size(), exemplars.dim(), "loss_img_align");
  const double zn = norm(z);
  if (!(zn > kNormEpsilon)) throw Error(ErrorCode::ZeroVector, "text embedding is zero");
  LossValue out{0.0, Vec(z.size(), 0.0)};
  const double w = 1.0 / static_cast<double>(exemplars.size());
  for (const auto& x : exemplars) {
    const double xn = norm(x.vector);
    if (!(xn > kNormEpsilon)) throw Error(ErrorCode::ZeroVector, "exemplar '" + x.name + "' is zero");
    out.value -= w * raw_cos(x.vector, xn, z, zn);
    accumulate_cos_grad(x.vector, xn, z, zn, -w, out.gradient);
  }
  return out;
}

Objective::Objective(EmbeddingSet exemplars, const NeighborhoodSpec& neighborhood, const SubspaceBasis& basis,
                     LossWeights weights, bool center_projections)
    : dim_(basis.dim),
      exemplars_(std::move(exemplars)),
      coarse_(neighborhood.coarse),
      fine_(neighborhood.fine),
      weights_(weights) {
  require_same_dim(exemplars_.dim(), dim_, "exemplars vs basis");
  require_same_dim(coarse_.dim(), dim_, "coarse set vs basis");
  require_same_dim(fine_.dim(), dim_, "fine set vs basis");
  if (!(weights.lambda1 >= 0.0) || !(weights.lambda2 >= 0.0) || !std::isfinite(weights.lambda1) ||
      !std::isfinite(weights.lambda2)) {
    throw Error(ErrorCode::InvalidConfig, "loss weights must be finite and nonnegative");
  }
  auto [coarse, fine] = split(basis, basis.k);
  coarse_part_ = std::move(coarse);
  fine_part_ = std::move(fine);
  center_ = center_projections ? basis.center : Vec(dim_, 0.0);
}

TotalLoss Objective::evaluate(std::span<const double> z) const {
  require_same_dim(z.size(), dim_, "objective input");
  TotalLoss out;
  auto img = loss_img_align(z, exemplars_);
  out.gradient = std::move(img.gradient);
  out.breakdown.img_align = img.value;

  auto add_term = [&](double weight, auto&& term_fn) -> double {
    if (weight == 0.0) {
      // Reported for diagnostics only; an unweighted term may be degenerate.
      try {
        return term_fn().value;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroProjection) throw;
        return 0.0;
      }
    }
    auto term = term_fn();
    for (std::size_t i = 0; i < dim_; ++i) out.gradient[i] += weight * term.gradient[i];
    return term.value;
  };
  out.breakdown.coarse =
      add_term(weights_.lambda1, [&] { return loss_coarse(z, coarse_, coarse_part_, center_); });
  out.breakdown.fine = add_term(weights_.lambda2, [&] { return loss_fine(z, fine_, fine_part_, center_); });
  out.breakdown.total = out.breakdown.img_align + weights_.lambda1 * out.breakdown.coarse +
                        weights_.lambda2 * out.breakdown.fine;
  return out;
}

LossValue loss_coarse(std::span<const double> z, const EmbeddingSet& coarse, const SubspacePart& part,
                      std::span<const double> center) {
  if (coarse.empty()) throw Error(ErrorCode::EmptySet, "empty coarse set");
  const Vec zp = project(part, z, center);
  const double zn = norm(zp);
  if (!(zn > kZeroProjection)) throw Error(ErrorCode::ZeroProjection, "text embedding projects to zero");
  const double w = 1.0 / static_cast<double>(coarse.size());
  LossValue out{0.0, {}};
  Vec g(zp.size(), 0.0);
  for (const auto& p : coarse) {
    const Vec pp = project(part, p.vector, center);
    const double pn = norm(pp);
    if (!(pn > kZeroProjection)) throw Error(ErrorCode::ZeroProjection, "neighbor '" + p.name + "' projects to zero");
    out.value += w * (1.0 - raw_cos(pp, pn, zp, zn));
    accumulate_cos_grad(pp, pn, zp, zn, -w, g);
  }
  out.gradient = lift(part, g);
  return out;
}

LossValue loss_fine(std::span<const double> z, const EmbeddingSet& fine, const SubspacePart& part,
                    std::span<const double> center) {
  if (fine.empty()) throw Error(ErrorCode::EmptySet, "empty fine set");
  const Vec zp = project(part, z, center);
  const double zn = norm(zp);
  if (!(zn > kZeroProjection)) throw Error(ErrorCode::ZeroProjection, "text embedding projects to zero");
  const double w = 1.0 / static_cast<double>(fine.size());
  LossValue out{0.0, {}};
  Vec g(zp.size(), 0.0);
  for (const auto& n : fine) {
    const Vec np = project(part, n.vector, center);
    const double nn = norm(np);
    if (!(nn > kZeroProjection)) throw Error(ErrorCode::ZeroProjection, "negative '" + n.name + "' projects to zero");
    out.value += w * raw_cos(np, nn, zp, zn);
    accumulate_cos_grad(np, nn, zp, zn, w, g);
  }
  out.gradient = lift(part, g);
  return out;
}

TotalLoss total_loss(std::span<const double> z, const EmbeddingSet& exemplars,
                     const NeighborhoodSpec& neighborhood, const SubspaceBasis& basis, LossWeights weights) {
  return Objective(exemplars, neighborhood, basis, weights).evaluate(z);
}

double gradcheck(const DifferentiableFn& fn, std::span<const double> z, double h) {
  const LossValue analytic = fn(z);
  require_finite(analytic.gradient, "analytic gradient");
  require_same_dim(analytic.gradient.size(), z.size(), "gradcheck");
  Vec probe(z.begin(), z.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    probe[i] = z[i] + h;
    const double up = fn(probe).value;
    probe[i] = z[i] - h;
    const double down = fn(probe).value;
    probe[i] = z[i];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw Error(ErrorCode::NonFinite, "loss is not finite near coordinate " + std::to_string(i));
    }
    const double fd = (up - down) / (2.0 * h);
    const double g = analytic.gradient[i];
    worst = std::max(worst, std::abs(fd - g) / std::max(1e-8, std::abs(fd) + std::abs(g)));
  }
  return worst;
}

}  // namespace embedfit
