#pragma once

#include <stdexcept>
#include <string>

namespace aas
{

class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad file headers, mismatched sizes, invalid parameters.
class ValidationError : public Error
{
public:
  using Error::Error;
};

/// A must-link/cannot-link pair that conflicts with the current closure.
class ContradictionError : public Error
{
public:
  using Error::Error;
};

class ZeroVectorError : public Error
{
public:
  using Error::Error;
};

class LevelOutOfRange : public Error
{
public:
  using Error::Error;
};

class InfeasibleShape : public Error
{
public:
  using Error::Error;
};

class NoPositives : public Error
{
public:
  using Error::Error;
};

class NotApplicable : public Error
{
public:
  using Error::Error;
};

class MissingIdentities : public Error
{
public:
  using Error::Error;
};

/// The oracle stopped answering mid-batch; constraints gathered so far are kept.
class CycleIncomplete : public Error
{
public:
  using Error::Error;
};

class RefreshTimeout : public Error
{
public:
  using Error::Error;
};

} // namespace aas
