#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "koopcert/dynamics.hpp"

namespace koopcert {

/// A finite family of observables psi_1..psi_N on R^d with analytic first and
/// second derivatives. Implementations are immutable after construction.
class Dictionary {
  public:
    virtual ~Dictionary() = default;

    virtual int size() const = 0;
    virtual int dim() const = 0;
    virtual std::string name() const = 0;

    /// out[j] = psi_j(x)
    virtual void values(const ConstVectorRef& x, VectorRef out) const = 0;
    /// out is N x d, row j = grad psi_j(x)
    virtual void gradients(const ConstVectorRef& x, MatrixRef out) const = 0;
    /// out is N x (d*d), row j = column-major Hessian of psi_j at x
    virtual void hessians(const ConstVectorRef& x, MatrixRef out) const = 0;

    /// Entry i is the index of the observable equal to the coordinate x_i, or -1.
    virtual std::vector<int> identity_map() const = 0;

    /// Radius around the coordinate axes where derivatives blow up (0 if none).
    virtual double sampling_exclusion() const { return 0.0; }
};

using DictionaryPtr = std::shared_ptr<const Dictionary>;

struct MonomialSpec {
    int dim = 1;
    int degree = 1;
    bool include_constant = false;
};

/// All monomials x^a with 1 <= |a| <= degree (|a| = 0 too if include_constant),
/// graded lexicographic order with the constant first.
class MonomialDictionary final : public Dictionary {
  public:
    explicit MonomialDictionary(MonomialSpec spec);

    int size() const override { return static_cast<int>(exponents_.size()); }
    int dim() const override { return spec_.dim; }
    std::string name() const override;
    void values(const ConstVectorRef& x, VectorRef out) const override;
    void gradients(const ConstVectorRef& x, MatrixRef out) const override;
    void hessians(const ConstVectorRef& x, MatrixRef out) const override;
    std::vector<int> identity_map() const override;

    const MonomialSpec& spec() const noexcept { return spec_; }
    const std::vector<std::vector<int>>& exponents() const noexcept { return exponents_; }

  private:
    MonomialSpec spec_;
    std::vector<std::vector<int>> exponents_;
};

/// Physicists' Hermite polynomials H_lo..H_hi of one variable, optionally divided
/// by sqrt(2^l l!) so they are orthonormal under the N(0, 1/2) law.
class HermiteDictionary final : public Dictionary {
  public:
    HermiteDictionary(int max_degree, bool normalized = false, bool include_constant = false);

    int size() const override { return hi_ - lo_ + 1; }
    int dim() const override { return 1; }
    std::string name() const override;
    void values(const ConstVectorRef& x, VectorRef out) const override;
    void gradients(const ConstVectorRef& x, MatrixRef out) const override;
    void hessians(const ConstVectorRef& x, MatrixRef out) const override;
    std::vector<int> identity_map() const override { return {-1}; }

    int lowest_degree() const noexcept { return lo_; }
    int highest_degree() const noexcept { return hi_; }
    bool normalized() const noexcept { return normalized_; }
    /// sqrt(2^l l!), or 1 if not normalized.
    double scale(int degree) const;

  private:
    void raw(double x, std::vector<double>& h) const;

    int lo_;
    int hi_;
    bool normalized_;
};

/// Per coordinate: sign(x)|x|^{1/2} and sign(x)|x|^{1/3}.
class RootDictionary final : public Dictionary {
  public:
    explicit RootDictionary(int dim);

    int size() const override { return 2 * dim_; }
    int dim() const override { return dim_; }
    std::string name() const override;
    void values(const ConstVectorRef& x, VectorRef out) const override;
    void gradients(const ConstVectorRef& x, MatrixRef out) const override;
    void hessians(const ConstVectorRef& x, MatrixRef out) const override;
    std::vector<int> identity_map() const override { return std::vector<int>(static_cast<std::size_t>(dim_), -1); }
    double sampling_exclusion() const override { return 1e-8; }

  private:
    int dim_;
};

/// Concatenation of dictionaries on the same state space.
class StackedDictionary final : public Dictionary {
  public:
    explicit StackedDictionary(std::vector<DictionaryPtr> parts);

    int size() const override { return size_; }
    int dim() const override { return dim_; }
    std::string name() const override;
    void values(const ConstVectorRef& x, VectorRef out) const override;
    void gradients(const ConstVectorRef& x, MatrixRef out) const override;
    void hessians(const ConstVectorRef& x, MatrixRef out) const override;
    std::vector<int> identity_map() const override;
    double sampling_exclusion() const override;

  private:
    std::vector<DictionaryPtr> parts_;
    std::vector<int> offsets_;
    int size_ = 0;
    int dim_ = 0;
};

/// One user-supplied observable with hand-written derivatives.
struct Observable {
    std::string name;
    std::function<double(const ConstVectorRef&)> value;
    std::function<void(const ConstVectorRef&, VectorRef)> gradient;  // d
    std::function<void(const ConstVectorRef&, MatrixRef)> hessian;   // d x d
};

class FunctionDictionary final : public Dictionary {
  public:
    FunctionDictionary(int dim, std::vector<Observable> observables, std::vector<int> identity = {});

    int size() const override { return static_cast<int>(observables_.size()); }
    int dim() const override { return dim_; }
    std::string name() const override { return "functions"; }
    void values(const ConstVectorRef& x, VectorRef out) const override;
    void gradients(const ConstVectorRef& x, MatrixRef out) const override;
    void hessians(const ConstVectorRef& x, MatrixRef out) const override;
    std::vector<int> identity_map() const override { return identity_; }

  private:
    int dim_;
    std::vector<Observable> observables_;
    std::vector<int> identity_;
};

/// Builds a dictionary from a name: "monomials" (degree, constant), "hermite" (degree,
/// normalized), "roots", or "monomials+roots".
DictionaryPtr make_dictionary(const std::string& kind, int dim, int degree, bool include_constant = false,
                              bool normalized = false);

Vector eval_psi(const Dictionary& dict, const Vector& x);

/// (L psi)(x) = (F(x) + sum_i G_i(x) u_i) . grad psi(x) + 1/2 sigma sigma^T : hess psi(x)
Vector eval_generator_psi(const Dictionary& dict, const ControlAffineSystem& system, const Vector& x,
                          const Vector& u);

enum class LiftKind { Generator, Operator };

struct LiftedData {
    Matrix psi_x;    // N x m
    Matrix image;    // L Psi(X) (generator) or Psi(Y) (operator), N x m
    LiftKind kind = LiftKind::Generator;
    std::size_t lag = 0;    // snapshots between x and y (operator mode, ergodic data)
    double lag_time = 0.0;  // seconds between x and y (operator mode)
    std::string dictionary;
    std::string dataset;
    int control_label = 0;

    std::size_t size() const noexcept { return static_cast<std::size_t>(psi_x.cols()); }
};

/// Psi(X) and L Psi(X) under the constant control e_{data.control_label}.
LiftedData lift_generator(const Dictionary& dict, const DataSet& data, const ControlAffineSystem& system);

/// Psi(X) and Psi(Y). Ergodic data pairs x_k with x_{k+lag}; iid data uses the stored partners.
LiftedData lift_operator(const Dictionary& dict, const DataSet& data, std::size_t lag = 1);

/// Picks the identity-coordinate entries of z.
Vector project_state(const Dictionary& dict, const Vector& z);

struct DerivativeCheck {
    double gradient_error = 0.0;  // max over points/observables of relative error
    double hessian_error = 0.0;
};

/// Central finite differences (values for gradients, analytic gradients for Hessians)
/// against the analytic derivatives. Relative error is |fd - exact| / max(1, |exact|)
/// taken entrywise.
DerivativeCheck check_derivatives(const Dictionary& dict, const Matrix& points, double step = 1e-5);

struct GramSpectrum {
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
    double condition = 0.0;
};

/// Spectrum of (1/n) sum psi(x_k) psi(x_k)^T over n iid points of `region`.
GramSpectrum gram_spectrum(const Dictionary& dict, const Region& region, std::size_t n = 10000,
                           std::uint64_t seed = 0);

/// Throws InvalidArgument if the Monte Carlo Gram matrix is numerically singular.
GramSpectrum require_linear_independence(const Dictionary& dict, const Region& region,
                                         std::size_t n = 10000, std::uint64_t seed = 0,
                                         double max_condition = 1e12);

}  // namespace koopcert
