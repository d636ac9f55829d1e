#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qho {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Two reported eigenvalues closer than the separation floor.
class MultiplicityError : public Error {
 public:
  MultiplicityError(std::size_t j, double gap)
      : Error("eigenvalue gap " + std::to_string(gap) + " between modes " + std::to_string(j) +
              " and " + std::to_string(j + 1)),
        index(j),
        gap(gap) {}
  std::size_t index;
  double gap;
};

class SmallDivisorError : public Error {
 public:
  SmallDivisorError(std::vector<std::size_t> j, std::vector<std::size_t> l, double omega, std::string what)
      : Error(std::move(what)), j(std::move(j)), l(std::move(l)), omega(omega) {}
  std::vector<std::size_t> j;
  std::vector<std::size_t> l;
  double omega;
};

class InstabilityError : public Error {
 public:
  using Error::Error;
};

class IntegratorError : public Error {
 public:
  using Error::Error;
};

}  // namespace qho
