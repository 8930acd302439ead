#include "wgqed/core.hpp"

#include <cmath>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <Eigen/SparseLU>

#include "wgqed/errors.hpp"

namespace wgqed {

namespace {

void require_same_space(const SpacePtr& a, const SpacePtr& b, const char* what) {
    if (!a || !b || (*a != *b)) {
        throw InvalidParameters(std::string("operator space mismatch in ") + what);
    }
}

void require_bosonic(const SpacePtr& space, int index, const char* what) {
    if (!space || index < 0 || index >= space->subsystem_count()) {
        throw InvalidParameters(std::string(what) + ": subsystem index out of range");
    }
    if (space->subsystem(index).kind != HilbertSpace::Subsystem::BosonicMode) {
        throw InvalidParameters(std::string(what) + ": subsystem is not a bosonic mode");
    }
}

void require_two_level(const SpacePtr& space, int index, const char* what) {
    if (!space || index < 0 || index >= space->subsystem_count()) {
        throw InvalidParameters(std::string(what) + ": subsystem index out of range");
    }
    if (space->subsystem(index).kind != HilbertSpace::Subsystem::TwoLevel) {
        throw InvalidParameters(std::string(what) + ": subsystem is not a two-level system");
    }
}

Matrix local_annihilation(int cutoff) {
    Matrix a = Matrix::Zero(cutoff, cutoff);
    for (int n = 1; n < cutoff; ++n) {
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    return a;
}

} // namespace

HilbertSpace::Subsystem HilbertSpace::bosonic_mode(int cutoff) {
    if (cutoff < 2) {
        throw InvalidParameters("bosonic mode cutoff must be at least 2");
    }
    return {Subsystem::BosonicMode, cutoff};
}

HilbertSpace::HilbertSpace(std::vector<Subsystem> subsystems) : subs_(std::move(subsystems)) {
    if (subs_.empty()) {
        throw InvalidParameters("Hilbert space needs at least one subsystem");
    }
    dim_ = 1;
    for (const auto& s : subs_) {
        dim_ *= s.dim();
    }
}

const HilbertSpace::Subsystem& HilbertSpace::subsystem(int index) const {
    if (index < 0 || index >= subsystem_count()) {
        throw InvalidParameters("subsystem index out of range");
    }
    return subs_[static_cast<size_t>(index)];
}

bool HilbertSpace::operator==(const HilbertSpace& other) const {
    if (subs_.size() != other.subs_.size()) return false;
    for (size_t i = 0; i < subs_.size(); ++i) {
        if (subs_[i].kind != other.subs_[i].kind || subs_[i].cutoff != other.subs_[i].cutoff) {
            return false;
        }
    }
    return true;
}

SpacePtr make_space(std::vector<HilbertSpace::Subsystem> subsystems) {
    return std::make_shared<const HilbertSpace>(std::move(subsystems));
}

QOperator::QOperator(SpacePtr space, Matrix matrix) : space_(std::move(space)), m_(std::move(matrix)) {
    if (!space_) {
        throw InvalidParameters("operator requires a space");
    }
    if (m_.rows() != space_->dim() || m_.cols() != space_->dim()) {
        throw InvalidParameters("operator matrix does not match space dimension");
    }
}

bool QOperator::is_hermitian(double tol) const {
    double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

QOperator QOperator::operator+(const QOperator& o) const {
    require_same_space(space_, o.space_, "operator addition");
    return {space_, m_ + o.m_};
}

QOperator QOperator::operator-(const QOperator& o) const {
    require_same_space(space_, o.space_, "operator subtraction");
    return {space_, m_ - o.m_};
}

QOperator QOperator::operator*(const QOperator& o) const {
    require_same_space(space_, o.space_, "operator product");
    return {space_, m_ * o.m_};
}

QOperator& QOperator::operator+=(const QOperator& o) {
    require_same_space(space_, o.space_, "operator addition");
    m_ += o.m_;
    return *this;
}

DensityState::DensityState(SpacePtr space, Matrix matrix)
    : space_(std::move(space)), m_(std::move(matrix)) {
    if (!space_ || m_.rows() != space_->dim() || m_.cols() != space_->dim()) {
        throw InvalidParameters("density matrix does not match space dimension");
    }
    double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol * scale) {
        throw InvalidParameters("density matrix is not Hermitian");
    }
    if (std::abs(m_.trace() - Complex(1.0, 0.0)) > kTraceTol) {
        throw InvalidParameters("density matrix trace is not 1");
    }
    Matrix herm = 0.5 * (m_ + m_.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw NumericalError("eigenvalue check of density matrix failed");
    }
    if (es.eigenvalues().minCoeff() < -kEigenvalueSlack) {
        throw InvalidParameters("density matrix has a significantly negative eigenvalue");
    }
}

Superoperator::Superoperator(SpacePtr space, SparseMatrix matrix)
    : space_(std::move(space)), m_(std::move(matrix)) {
    if (!space_) {
        throw InvalidParameters("superoperator requires a space");
    }
    const int d2 = space_->dim() * space_->dim();
    if (m_.rows() != d2 || m_.cols() != d2) {
        throw InvalidParameters("superoperator matrix must be dim^2 x dim^2");
    }
}

const Matrix& Superoperator::dense() const {
    if (!have_dense_) {
        dense_ = Matrix(m_);
        have_dense_ = true;
    }
    return dense_;
}

Vector vectorize(const Matrix& m) {
    return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix unvectorize(const Vector& v, int dim) {
    if (v.size() != static_cast<Eigen::Index>(dim) * dim) {
        throw InvalidParameters("vector length does not match dim^2");
    }
    return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

QOperator embed(SpacePtr space, int subsystem_index, const Matrix& local) {
    if (!space || subsystem_index < 0 || subsystem_index >= space->subsystem_count()) {
        throw InvalidParameters("embed: subsystem index out of range");
    }
    const int local_dim = space->subsystem(subsystem_index).dim();
    if (local.rows() != local_dim || local.cols() != local_dim) {
        throw InvalidParameters("embed: local matrix does not match subsystem dimension");
    }
    Matrix out = Matrix::Identity(1, 1);
    for (int i = 0; i < space->subsystem_count(); ++i) {
        Matrix factor = (i == subsystem_index)
            ? local
            : Matrix(Matrix::Identity(space->subsystem(i).dim(), space->subsystem(i).dim()));
        out = Eigen::kroneckerProduct(out, factor).eval();
    }
    return {std::move(space), std::move(out)};
}

QOperator identity_operator(SpacePtr space) {
    if (!space) {
        throw InvalidParameters("identity_operator requires a space");
    }
    Matrix id = Matrix::Identity(space->dim(), space->dim());
    return {std::move(space), std::move(id)};
}

std::pair<QOperator, QOperator> ladder_operators(SpacePtr space, int subsystem_index) {
    require_bosonic(space, subsystem_index, "ladder_operators");
    Matrix a = local_annihilation(space->subsystem(subsystem_index).cutoff);
    QOperator lower = embed(space, subsystem_index, a);
    QOperator raise = lower.adjoint();
    return {std::move(lower), std::move(raise)};
}

QOperator number_operator(SpacePtr space, int subsystem_index) {
    require_bosonic(space, subsystem_index, "number_operator");
    const int cutoff = space->subsystem(subsystem_index).cutoff;
    Matrix n = Matrix::Zero(cutoff, cutoff);
    for (int k = 0; k < cutoff; ++k) {
        n(k, k) = static_cast<double>(k);
    }
    return embed(std::move(space), subsystem_index, n);
}

QOperator lowering_operator(SpacePtr space, int subsystem_index) {
    require_two_level(space, subsystem_index, "lowering_operator");
    Matrix sm = Matrix::Zero(2, 2);
    sm(0, 1) = 1.0; // |g><e| with basis order (|g>, |e>)
    return embed(std::move(space), subsystem_index, sm);
}

QOperator raising_operator(SpacePtr space, int subsystem_index) {
    return lowering_operator(std::move(space), subsystem_index).adjoint();
}

QOperator excited_projector(SpacePtr space, int subsystem_index) {
    require_two_level(space, subsystem_index, "excited_projector");
    Matrix p = Matrix::Zero(2, 2);
    p(1, 1) = 1.0;
    return embed(std::move(space), subsystem_index, p);
}

QOperator displacement_operator(SpacePtr space, int subsystem_index, Complex alpha) {
    require_bosonic(space, subsystem_index, "displacement_operator");
    const int cutoff = space->subsystem(subsystem_index).cutoff;
    if (std::norm(alpha) >= 0.25 * cutoff) {
        throw TruncationError("displacement amplitude too large for the Fock cutoff");
    }
    Matrix a = local_annihilation(cutoff);
    Matrix gen = alpha * a.adjoint() - std::conj(alpha) * a;
    Matrix d = gen.exp();
    return embed(std::move(space), subsystem_index, d);
}

Superoperator liouvillian(const QOperator& hamiltonian, const std::vector<QOperator>& jumps) {
    const SpacePtr& space = hamiltonian.space();
    if (!space) {
        throw InvalidParameters("liouvillian requires a Hamiltonian with a space");
    }
    if (!hamiltonian.is_hermitian()) {
        throw InvalidParameters("Hamiltonian must be Hermitian");
    }
    const int d = space->dim();
    SparseMatrix id(d, d);
    id.setIdentity();

    const Complex minus_i(0.0, -1.0);
    SparseMatrix h = hamiltonian.matrix().sparseView();
    SparseMatrix ht = SparseMatrix(h.transpose());
    SparseMatrix gen = SparseMatrix(Eigen::kroneckerProduct(id, h));
    gen = minus_i * gen + Complex(0.0, 1.0) * SparseMatrix(Eigen::kroneckerProduct(ht, id));

    for (const auto& jump : jumps) {
        require_same_space(space, jump.space(), "liouvillian jump operator");
        SparseMatrix l = jump.matrix().sparseView();
        SparseMatrix lconj = l.conjugate();
        SparseMatrix ldl = SparseMatrix(l.adjoint()) * l;
        SparseMatrix ldlt = SparseMatrix(ldl.transpose());
        gen += SparseMatrix(Eigen::kroneckerProduct(lconj, l));
        gen -= Complex(0.5) * SparseMatrix(Eigen::kroneckerProduct(id, ldl));
        gen -= Complex(0.5) * SparseMatrix(Eigen::kroneckerProduct(ldlt, id));
    }
    gen.makeCompressed();
    return {space, std::move(gen)};
}

DensityState steady_state(const Superoperator& generator) {
    const int d = generator.space()->dim();
    const int d2 = d * d;

    double scale = 0.0;
    const SparseMatrix& gen = generator.matrix();
    for (int k = 0; k < gen.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(gen, k); it; ++it) {
            scale = std::max(scale, std::abs(it.value()));
        }
    }
    if (scale == 0.0) {
        throw NondegeneracyError("steady state is not unique: the generator vanishes");
    }

    // Replace the first row with the trace constraint; diagonal entries of rho
    // sit at vec indices k*(d+1) in column-stacking order.
    std::vector<Eigen::Triplet<Complex>> triplets;
    triplets.reserve(static_cast<size_t>(gen.nonZeros()) + static_cast<size_t>(d));
    const Complex inv_scale(1.0 / scale, 0.0);
    for (int k = 0; k < gen.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(gen, k); it; ++it) {
            if (it.row() == 0) continue;
            triplets.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                                  it.value() * inv_scale);
        }
    }
    for (int k = 0; k < d; ++k) {
        triplets.emplace_back(0, k * (d + 1), Complex(1.0, 0.0));
    }
    SparseMatrix a(d2, d2);
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();

    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) {
        throw NondegeneracyError("steady-state solve failed: generator kernel is not one-dimensional");
    }

    Vector b = Vector::Zero(d2);
    b(0) = 1.0;
    Vector v = lu.solve(b);
    for (int pass = 0; pass < 3; ++pass) {
        Vector r = a * v - b;
        v -= lu.solve(r);
    }

    double residual = (gen * v).cwiseAbs().maxCoeff() / scale;
    if (!std::isfinite(residual) || residual > 1e-9) {
        throw NumericalError("steady-state residual did not converge");
    }

    Matrix rho = unvectorize(v, d);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace();
    return {generator.space(), std::move(rho)};
}

Matrix propagator(const Superoperator& generator, double tau) {
    if (tau < 0.0) {
        throw InvalidParameters("propagator requires tau >= 0");
    }
    Matrix scaled = tau * generator.dense();
    return scaled.exp();
}

Vector propagate(const Superoperator& generator, const Vector& rho_vec, double tau) {
    if (rho_vec.size() != generator.dim()) {
        throw InvalidParameters("propagate: vector length does not match generator");
    }
    return propagator(generator, tau) * rho_vec;
}

Complex expectation(const QOperator& op, const Matrix& rho) {
    return (op.matrix() * rho).trace();
}

Complex expectation(const QOperator& op, const DensityState& rho) {
    require_same_space(op.space(), rho.space(), "expectation");
    return expectation(op, rho.matrix());
}

std::vector<int> excitation_subspace(const HilbertSpace& space, int max_excitations) {
    if (max_excitations < 0) {
        throw InvalidParameters("excitation_subspace requires max_excitations >= 0");
    }
    std::vector<int> dims(static_cast<size_t>(space.subsystem_count()));
    for (int i = 0; i < space.subsystem_count(); ++i) {
        dims[static_cast<size_t>(i)] = space.subsystem(i).dim();
    }
    std::vector<int> kept;
    for (int idx = 0; idx < space.dim(); ++idx) {
        int rest = idx;
        int total = 0;
        // Mixed-radix decomposition, last subsystem varies fastest.
        for (int i = space.subsystem_count() - 1; i >= 0; --i) {
            total += rest % dims[static_cast<size_t>(i)];
            rest /= dims[static_cast<size_t>(i)];
        }
        if (total <= max_excitations) {
            kept.push_back(idx);
        }
    }
    return kept;
}

} // namespace wgqed
