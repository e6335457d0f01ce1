#include "mbrkit/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace mbrkit::synthetic {

std::string random_sentence(std::size_t length, std::size_t vocab, Rng& rng) {
  std::string s;
  for (std::size_t i = 0; i < length; ++i) {
    if (i > 0) s += ' ';
    s += 'w';
    s += std::to_string(rng.below(vocab));
  }
  return s;
}

std::string noisy_copy(const std::string& base, double noise, std::size_t vocab,
                       Rng& rng) {
  std::istringstream in(base);
  std::string tok;
  std::string out;
  while (in >> tok) {
    if (rng.uniform() < noise) tok = "w" + std::to_string(rng.below(vocab));
    if (rng.uniform() < noise / 2) continue;
    if (!out.empty()) out += ' ';
    out += tok;
  }
  return out;
}

std::vector<std::string> distinct_variants(const std::string& base, std::size_t n,
                                           double max_noise, std::size_t vocab,
                                           Rng& rng) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  while (out.size() < n) {
    std::string s = noisy_copy(base, rng.uniform(0.0, max_noise), vocab, rng);
    if (seen.count(s) != 0) s += " x" + std::to_string(out.size());
    if (!seen.insert(s).second) continue;
    out.push_back(std::move(s));
  }
  return out;
}

double normal(Rng& rng) {
  double u1 = rng.uniform();
  while (u1 <= 0.0) u1 = rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::shared_ptr<EmbeddingTable> random_embeddings(
    const std::vector<std::string>& texts, std::size_t dim, Rng& rng) {
  auto table = std::make_shared<EmbeddingTable>(dim);
  for (const auto& t : texts) {
    if (table->find(t) != nullptr) continue;
    std::vector<double> v(dim);
    for (double& x : v) x = normal(rng);
    table->insert(t, std::move(v));
  }
  return table;
}

std::shared_ptr<EmbeddingTable> one_hot_embeddings(
    const std::vector<std::string>& texts) {
  std::vector<std::string> distinct;
  std::set<std::string> seen;
  for (const auto& t : texts) {
    if (seen.insert(t).second) distinct.push_back(t);
  }
  auto table = std::make_shared<EmbeddingTable>(distinct.size());
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    std::vector<double> v(distinct.size(), 0.0);
    v[i] = 1.0;
    table->insert(distinct[i], std::move(v));
  }
  return table;
}

DotProblem dot_problem(std::size_t n_hyps, std::size_t n_refs, std::size_t dim,
                       bool with_lprobs, Rng& rng) {
  DotProblem p;
  std::vector<std::string> texts;
  for (std::size_t i = 0; i < n_hyps; ++i) {
    p.instance.hypotheses.push_back("h" + std::to_string(i));
  }
  std::vector<std::string> refs;
  for (std::size_t j = 0; j < n_refs; ++j) refs.push_back("r" + std::to_string(j));
  texts = p.instance.hypotheses;
  texts.insert(texts.end(), refs.begin(), refs.end());
  p.instance.source = "src";
  texts.push_back("src");
  p.instance.references = ReferenceBag(refs);
  if (with_lprobs) {
    std::vector<double> lp(n_refs);
    for (double& x : lp) x = rng.uniform(-5.0, 0.0);
    p.instance.lprobs = std::move(lp);
  }
  p.table = random_embeddings(texts, dim, rng);
  return p;
}

std::vector<double> low_rank_matrix(std::size_t rows, std::size_t cols,
                                    std::size_t rank, Rng& rng) {
  std::vector<double> u(rows * rank);
  std::vector<double> v(cols * rank);
  for (double& x : u) x = normal(rng);
  for (double& x : v) x = normal(rng);
  const double scale = 1.0 / std::sqrt(static_cast<double>(rank));
  std::vector<double> m(rows * cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < rank; ++t) s += u[i * rank + t] * v[j * rank + t];
      m[i * cols + j] = s * scale;
    }
  }
  return m;
}

}  // namespace mbrkit::synthetic
