#ifndef FFPC_ERRORS_HPP
#define FFPC_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ffpc
{
// Root of every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Bad user input: non-physical parameters, broken invariants, malformed data.
class ValidationError : public Error
{
public:
    using Error::Error;
};

class SingularPropagationError : public Error
{
public:
    using Error::Error;
};

class NonPhysicalBeamError : public Error
{
public:
    using Error::Error;
};

class CoreClippingError : public Error
{
public:
    CoreClippingError(const std::string &what, double axial_position)
        : Error(what), axial_position_(axial_position) {}
    // Axial position (m, from the SM-GRIN splice) where the beam first exceeds a core.
    double axial_position() const { return axial_position_; }

private:
    double axial_position_;
};

class NoSolutionError : public Error
{
public:
    NoSolutionError(const std::string &what, double best_residual)
        : Error(what), best_residual_(best_residual) {}
    double best_residual() const { return best_residual_; }

private:
    double best_residual_;
};

class InstabilityError : public Error
{
public:
    InstabilityError(const std::string &what, double g1, double g2)
        : Error(what), g1_(g1), g2_(g2) {}
    double g1() const { return g1_; }
    double g2() const { return g2_; }

private:
    double g1_;
    double g2_;
};

// Numerical failure: quadrature or iteration did not converge.
class NumericalError : public Error
{
public:
    using Error::Error;
};

class FitError : public NumericalError
{
public:
    FitError(const std::string &what, std::size_t iterations, double cost)
        : NumericalError(what), iterations_(iterations), cost_(cost) {}
    std::size_t iterations() const { return iterations_; }
    double cost() const { return cost_; }

private:
    std::size_t iterations_;
    double cost_;
};

class OverdampedError : public Error
{
public:
    using Error::Error;
};

class InconsistentDataError : public Error
{
public:
    using Error::Error;
};

// A sweep or scan produced nothing usable.
class NoDataError : public Error
{
public:
    using Error::Error;
};

class EmptySpectrumError : public Error
{
public:
    using Error::Error;
};

class NotImplementedError : public Error
{
public:
    using Error::Error;
};

class ParseError : public ValidationError
{
public:
    ParseError(const std::string &what, std::size_t line)
        : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

} // namespace ffpc

#endif // FFPC_ERRORS_HPP
