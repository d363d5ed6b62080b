#pragma once

#include <stdexcept>
#include <string>

namespace mil {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingFileError : public DataError {
 public:
  using DataError::DataError;
};

// Patch count or embedding width disagrees between manifest, shard and tissue file.
class ShapeMismatchError : public DataError {
 public:
  using DataError::DataError;
};

class UnknownBagError : public DataError {
 public:
  using DataError::DataError;
};

// Bag exists but carries no label for the requested task.
class MissingLabelError : public DataError {
 public:
  using DataError::DataError;
};

// Unparseable file or violated format invariant (bad magic, duplicate id, ...).
class FormatError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace mil
