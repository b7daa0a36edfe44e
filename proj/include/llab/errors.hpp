#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace llab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Carries every schema or precondition failure found, not only the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> issues);
  explicit ValidationError(const std::string& issue)
      : ValidationError(std::vector<std::string>{issue}) {}
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

class UnsupportedGridError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class EmptyProjectionError : public DomainError {
 public:
  using DomainError::DomainError;
};

class ResolventError : public Error {
 public:
  ResolventError(const std::string& what, double offending_eigenvalue)
      : Error(what), offending_(offending_eigenvalue) {}
  double offending_eigenvalue() const { return offending_; }

 private:
  double offending_;
};

class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double coarse, double fine)
      : Error(what), coarse_(coarse), fine_(fine) {}
  double coarse() const { return coarse_; }
  double fine() const { return fine_; }

 private:
  double coarse_, fine_;
};

class AssemblyError : public Error {
 public:
  using Error::Error;
};

}  // namespace llab
