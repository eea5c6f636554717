#include "embedfit/optimizer.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <set>
#include <thread>

#include "embedfit/error.hpp"
#include "embedfit/hash.hpp"

namespace embedfit {
namespace {

std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void FitConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw Error(ErrorCode::InvalidConfig, "eta must be positive");
  if (warmup_steps == 0 || warmup_steps > total_steps) {
    throw Error(ErrorCode::InvalidConfig, "warmup_steps must be in [1, total_steps]");
  }
  if (k < 1) throw Error(ErrorCode::InvalidConfig, "k must be at least 1");
  if (keep_k < 1) throw Error(ErrorCode::InvalidConfig, "keep_k must be at least 1");
  if (log_interval < 1) throw Error(ErrorCode::InvalidConfig, "log_interval must be at least 1");
  if (!(weights.lambda1 >= 0.0) || !(weights.lambda2 >= 0.0) || !std::isfinite(weights.lambda1) ||
      !std::isfinite(weights.lambda2)) {
    throw Error(ErrorCode::InvalidConfig, "lambda1 and lambda2 must be finite and nonnegative");
  }
}

std::string describe(const FitConfig& c) {
  std::string s;
  auto field = [&](const char* key, const std::string& value) { s += std::string(key) + "=" + value + ";"; };
  field("eta", fmt_double(c.eta));
  field("warmup_steps", std::to_string(c.warmup_steps));
  field("total_steps", std::to_string(c.total_steps));
  field("lambda1", fmt_double(c.weights.lambda1));
  field("lambda2", fmt_double(c.weights.lambda2));
  field("k", std::to_string(c.k));
  field("keep_k", std::to_string(c.keep_k));
  field("seed", std::to_string(c.seed));
  field("mode", to_string(c.mode));
  field("renormalize_each_step", c.renormalize_each_step ? "1" : "0");
  field("center_projections", c.center_projections ? "1" : "0");
  field("beta1", fmt_double(c.adam.beta1));
  field("beta2", fmt_double(c.adam.beta2));
  field("adam_eps", fmt_double(c.adam.eps));
  field("log_interval", std::to_string(c.log_interval));
  if (c.mode == EncoderMode::Toy) {
    field("token_dim", std::to_string(c.toy_shape.token_dim));
    field("vocab_size", std::to_string(c.toy_shape.vocab_size));
    field("context_length", std::to_string(c.toy_shape.context_length));
    field("toy_init_token", c.toy_init_token ? std::to_string(*c.toy_init_token) : "mean");
  }
  return s;
}

double lr_at(const FitConfig& config, std::size_t t) {
  if (t >= config.total_steps) {
    throw Error(ErrorCode::OutOfRange,
                "step " + std::to_string(t) + " outside [0, " + std::to_string(config.total_steps) + ")");
  }
  const double ramp = static_cast<double>(t + 1) / static_cast<double>(config.warmup_steps);
  return config.eta * std::min(1.0, ramp);
}

Vec adam_step(AdamState& state, std::span<const double> g, double lr, const AdamParams& p) {
  require_same_dim(g.size(), state.m.size(), "adam_step");
  require_finite(g, "gradient");
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(p.beta1, t);
  const double c2 = 1.0 - std::pow(p.beta2, t);
  Vec update(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    state.m[i] = p.beta1 * state.m[i] + (1.0 - p.beta1) * g[i];
    state.v[i] = p.beta2 * state.v[i] + (1.0 - p.beta2) * g[i] * g[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    update[i] = -lr * m_hat / (std::sqrt(v_hat) + p.eps);
  }
  return update;
}

std::uint64_t basis_checksum(const SubspaceBasis& basis) {
  Fnv1a h;
  h.update(static_cast<std::uint64_t>(basis.dim));
  h.update(static_cast<std::uint64_t>(basis.k));
  h.update(std::span<const double>(basis.center));
  h.update(std::span<const double>(basis.eigenvalues));
  for (const auto& u : basis.components) h.update(std::span<const double>(u));
  return h.digest();
}

FitSetup prepare_fit(const EmbeddingSet& exemplars, const CandidateSpec& spec, const EmbeddingSet& text_lookup,
                     const FitConfig& config) {
  FitSetup setup;
  setup.neighborhood = build_neighborhood(spec, text_lookup, exemplars, config.keep_k);
  if (setup.neighborhood.union_set.size() < 3) {
    throw Error(ErrorCode::SplitInfeasible, "neighborhood has fewer than 3 embeddings");
  }
  setup.basis = fit_pca(setup.neighborhood.union_set, true);
  if (setup.basis.rank() < 2) {
    throw Error(ErrorCode::SplitInfeasible, "neighborhood PCA has rank " + std::to_string(setup.basis.rank()));
  }
  if (config.k >= setup.basis.rank()) {
    throw Error(ErrorCode::InvalidSplit, "k = " + std::to_string(config.k) + " but the neighborhood basis has rank " +
                                             std::to_string(setup.basis.rank()));
  }
  setup.basis.k = config.k;
  return setup;
}

TextEncoder make_encoder(const FitConfig& config, std::size_t output_dim) {
  if (config.mode == EncoderMode::Identity) return TextEncoder::identity(output_dim);
  ToyEncoderShape shape = config.toy_shape;
  shape.output_dim = output_dim;
  return TextEncoder::toy(init_frozen(config.seed, shape), PromptTemplate::default_template());
}

FitReport fit_class(const EmbeddingSet& exemplars, const Embedding& z0, const CandidateSpec& spec,
                    const EmbeddingSet& text_lookup, const FitConfig& config) {
  config.validate();
  require_same_dim(exemplars.dim(), text_lookup.dim(), "exemplars vs vocabulary");
  const std::size_t d = text_lookup.dim();
  const FitSetup setup = prepare_fit(exemplars, spec, text_lookup, config);
  const Objective objective(exemplars, setup.neighborhood, setup.basis, config.weights, config.center_projections);
  const TextEncoder encoder = make_encoder(config, d);

  FitReport report;
  report.class_name = spec.class_name;
  report.config = config;
  for (const auto& e : setup.neighborhood.coarse) report.coarse_names.push_back(e.name);
  for (const auto& e : setup.neighborhood.fine) report.fine_names.push_back(e.name);
  report.basis_rank = setup.basis.rank();
  report.basis_checksum = basis_checksum(setup.basis);
  report.encoder_checksum_before = encoder.checksum();

  Vec token;
  if (config.mode == EncoderMode::Identity) {
    require_same_dim(z0.dim(), d, "initial embedding");
    token = z0.vector;
  } else if (config.toy_init_token) {
    auto row = encoder.toy_encoder()->vocab_row(*config.toy_init_token);
    token.assign(row.begin(), row.end());
  } else {
    token = encoder.toy_encoder()->vocab_mean();
  }
  const double token_norm = norm(token);
  report.initial = {spec.class_name, encoder.encode(token)};

  AdamState state(token.size());
  for (std::size_t t = 0; t < config.total_steps; ++t) {
    const Vec z = encoder.encode(token);
    const TotalLoss loss = objective.evaluate(z);
    if (t % config.log_interval == 0) report.trajectory.push_back({t, loss.breakdown});
    const Vec g = encoder.encode_vjp(token, loss.gradient);
    const Vec update = adam_step(state, g, lr_at(config, t), config.adam);
    for (std::size_t i = 0; i < token.size(); ++i) token[i] += update[i];
    if (config.renormalize_each_step) {
      const double n = norm(token);
      if (!(n > kNormEpsilon)) throw Error(ErrorCode::ZeroVector, "token collapsed to zero");
      for (double& x : token) x *= token_norm / n;
    }
  }
  Vec z = encoder.encode(token);
  report.trajectory.push_back({config.total_steps, objective.evaluate(z).breakdown});
  report.final_embedding = {spec.class_name, std::move(z)};
  if (config.mode == EncoderMode::Toy) report.final_token = token;
  report.steps_run = config.total_steps;
  report.encoder_checksum_after = encoder.checksum();
  return report;
}

void ClassRegistry::add(Embedding embedding, std::uint64_t provenance) {
  if (find(embedding.name)) throw Error(ErrorCode::DuplicateClass, "class '" + embedding.name + "' already registered");
  if (!entries_.empty()) require_same_dim(embedding.dim(), entries_.front().embedding.dim(), "registry entry");
  entries_.push_back({std::move(embedding), provenance});
}

const Embedding* ClassRegistry::find(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.embedding.name == name) return &e.embedding;
  }
  return nullptr;
}

EmbeddingSet ClassRegistry::as_set(std::optional<std::size_t> count) const {
  const std::size_t n = std::min(count.value_or(entries_.size()), entries_.size());
  EmbeddingSet out(entries_.empty() ? 0 : entries_.front().embedding.dim());
  for (std::size_t i = 0; i < n; ++i) out.add(entries_[i].embedding);
  return out;
}

std::size_t thread_limit() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("EMBEDFIT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) n = static_cast<std::size_t>(v);
  }
  return n;
}

ClassRegistry fit_sequential(const std::vector<ClassTask>& tasks, const EmbeddingSet& text_lookup,
                             const FitConfig& config, std::vector<FitReport>* reports, std::size_t threads) {
  std::set<std::string> names;
  for (const auto& task : tasks) {
    if (!names.insert(task.spec.class_name).second) {
      throw Error(ErrorCode::DuplicateClass, "class '" + task.spec.class_name + "' appears twice");
    }
  }

  std::vector<std::optional<FitReport>> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        const auto& task = tasks[i];
        results[i] = fit_class(task.exemplars, task.z0, task.spec, text_lookup, task.config.value_or(config));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), tasks.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  ClassRegistry registry;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    const auto& cfg = tasks[i].config.value_or(config);
    Fnv1a h;
    h.update(tasks[i].spec.class_name);
    h.update(describe(cfg));
    registry.add(results[i]->final_embedding, h.digest());
    if (reports) reports->push_back(std::move(*results[i]));
  }
  return registry;
}

}  // namespace embedfit
