#pragma once

#include "hz/real.hpp"

#include <stdexcept>
#include <string>

namespace hz {

// A requested tolerance could not be met; carries the bound actually achieved.
class accuracy_error : public std::runtime_error {
  public:
    accuracy_error(const std::string& what, Real achieved)
        : std::runtime_error(what + " (achieved bound " + to_decimal_string(achieved) + ")"),
          achieved_(std::move(achieved)) {}
    const Real& achieved() const { return achieved_; }

  private:
    Real achieved_;
};

// Gamma evaluated at a nonpositive integer.
class pole_error : public std::domain_error {
  public:
    explicit pole_error(long n)
        : std::domain_error("gamma pole at nonpositive integer " + std::to_string(n)), n_(n) {}
    long pole() const { return n_; }

  private:
    long n_;
};

class convergence_error : public std::runtime_error {
  public:
    convergence_error(const std::string& what, Real residual)
        : std::runtime_error(what + " (last residual " + to_decimal_string(residual) + ")"),
          residual_(std::move(residual)) {}
    const Real& residual() const { return residual_; }

  private:
    Real residual_;
};

}  // namespace hz
