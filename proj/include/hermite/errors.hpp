#pragma once

#include <stdexcept>
#include <string>

namespace hermite {

/// Requested polynomial degree or rule order is outside the implemented range.
class unsupported_error : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

/// A local DOF matrix could not be inverted; the element is degenerate.
class degenerate_element_error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Coefficient data is not uniformly elliptic at a sampled point.
class ellipticity_error : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

/// Coefficient data violates the Cordes condition (nonpositive weight or epsilon).
class cordes_error : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

/// The sparse factorization detected a numerically singular matrix.
class singular_matrix_error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

} // namespace hermite
