#ifndef MBRKIT_ERROR_HPP_
#define MBRKIT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace mbrkit {

// Malformed or inconsistent input data (bad JSON, misaligned lprobs,
// missing embeddings). The CLI maps this to exit status 1.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or command-line usage. The CLI maps this to exit
// status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mbrkit

#endif  // MBRKIT_ERROR_HPP_
