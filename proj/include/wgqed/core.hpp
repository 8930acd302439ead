#ifndef WGQED_CORE_HPP
#define WGQED_CORE_HPP

#include <complex>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace wgqed {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;

// Ordered composite of two-level systems and truncated bosonic modes.
// A BosonicMode with cutoff n keeps Fock levels 0..n-1.
class HilbertSpace {
public:
    struct Subsystem {
        enum Kind { TwoLevel, BosonicMode } kind;
        int cutoff; // 2 for TwoLevel
        int dim() const { return cutoff; }
    };

    static Subsystem two_level() { return {Subsystem::TwoLevel, 2}; }
    static Subsystem bosonic_mode(int cutoff);

    explicit HilbertSpace(std::vector<Subsystem> subsystems);

    int dim() const { return dim_; }
    int subsystem_count() const { return static_cast<int>(subs_.size()); }
    const Subsystem& subsystem(int index) const;

    bool operator==(const HilbertSpace& other) const;
    bool operator!=(const HilbertSpace& other) const { return !(*this == other); }

private:
    std::vector<Subsystem> subs_;
    int dim_ = 0;
};

using SpacePtr = std::shared_ptr<const HilbertSpace>;

SpacePtr make_space(std::vector<HilbertSpace::Subsystem> subsystems);

// Dense operator on a HilbertSpace.
class QOperator {
public:
    QOperator() = default;
    QOperator(SpacePtr space, Matrix matrix);

    const SpacePtr& space() const { return space_; }
    const Matrix& matrix() const { return m_; }
    Matrix& matrix() { return m_; }

    QOperator adjoint() const { return {space_, m_.adjoint()}; }
    bool is_hermitian(double tol = 1e-10) const;

    QOperator operator+(const QOperator& o) const;
    QOperator operator-(const QOperator& o) const;
    QOperator operator*(const QOperator& o) const;
    QOperator operator*(Complex c) const { return {space_, c * m_}; }
    QOperator& operator+=(const QOperator& o);

private:
    SpacePtr space_;
    Matrix m_;
};

inline QOperator operator*(Complex c, const QOperator& op) { return op * c; }

// Density matrix with validated invariants (hermiticity, unit trace,
// positivity up to a small negative eigenvalue slack).
class DensityState {
public:
    DensityState(SpacePtr space, Matrix matrix);

    const SpacePtr& space() const { return space_; }
    const Matrix& matrix() const { return m_; }

    static constexpr double kHermitianTol = 1e-10;
    static constexpr double kTraceTol = 1e-10;
    static constexpr double kEigenvalueSlack = 1e-8;

private:
    SpacePtr space_;
    Matrix m_;
};

// Vectorized Lindblad generator, column-stacking convention:
// vec(rho)[c*d + r] = rho(r, c), so vec(A X B) = (B^T kron A) vec(X).
class Superoperator {
public:
    Superoperator(SpacePtr space, SparseMatrix matrix);

    const SpacePtr& space() const { return space_; }
    const SparseMatrix& matrix() const { return m_; }
    const Matrix& dense() const; // built lazily, cached

    int dim() const { return static_cast<int>(m_.rows()); }

private:
    SpacePtr space_;
    SparseMatrix m_;
    mutable Matrix dense_;
    mutable bool have_dense_ = false;
};

Vector vectorize(const Matrix& m);
Matrix unvectorize(const Vector& v, int dim);

// Embeds a subsystem-local matrix into the full space with identities
// on every other tensor factor.
QOperator embed(SpacePtr space, int subsystem_index, const Matrix& local);

QOperator identity_operator(SpacePtr space);

// Truncated ladder pair (annihilation, creation) on a bosonic subsystem.
std::pair<QOperator, QOperator> ladder_operators(SpacePtr space, int subsystem_index);
QOperator number_operator(SpacePtr space, int subsystem_index);

// Two-level helpers: |g><e|, |e><g|, |e><e|.
QOperator lowering_operator(SpacePtr space, int subsystem_index);
QOperator raising_operator(SpacePtr space, int subsystem_index);
QOperator excited_projector(SpacePtr space, int subsystem_index);

// exp(alpha a^dag - conj(alpha) a) on the given mode, identity elsewhere.
// Throws TruncationError when |alpha|^2 >= cutoff/4.
QOperator displacement_operator(SpacePtr space, int subsystem_index, Complex alpha);

// Standard diagonal Lindblad generator
//   L rho = -i[H, rho] + sum_k (L_k rho L_k^dag - 1/2 {L_k^dag L_k, rho}).
Superoperator liouvillian(const QOperator& hamiltonian, const std::vector<QOperator>& jumps);

// Unique trace-one null state of the generator. Sparse LU with the trace
// constraint replacing one row, plus iterative refinement.
DensityState steady_state(const Superoperator& generator);

// exp(tau L) applied to a vectorized operator.
Vector propagate(const Superoperator& generator, const Vector& rho_vec, double tau);

// Dense exp(tau L), reusable across a tau grid via repeated application.
Matrix propagator(const Superoperator& generator, double tau);

Complex expectation(const QOperator& op, const DensityState& rho);
Complex expectation(const QOperator& op, const Matrix& rho);

// Indices of product-basis states whose total excitation number
// (two-level occupations + Fock numbers) is <= max_excitations.
std::vector<int> excitation_subspace(const HilbertSpace& space, int max_excitations);

} // namespace wgqed

#endif
