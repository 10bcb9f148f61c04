// Copyright 2026 The metricdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef METRICDP_ERRORS_HPP_
#define METRICDP_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace metricdp {

// Base class for all library errors. CLI maps subtypes to exit codes.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class DuplicateWord : public Error {
 public:
  DuplicateWord(std::string token, std::size_t line)
      : Error("duplicate word \"" + token + "\" at line " +
              std::to_string(line)),
        token_(std::move(token)),
        line_(line) {}
  const std::string& token() const { return token_; }
  std::size_t line() const { return line_; }

 private:
  std::string token_;
  std::size_t line_;
};

class EmptyFile : public Error {
 public:
  using Error::Error;
};

class MalformedNumber : public Error {
 public:
  MalformedNumber(const std::string& what, std::size_t line)
      : Error(what + " at line " + std::to_string(line)), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class KTooLarge : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class VocabularyTooSmall : public Error {
 public:
  using Error::Error;
};

class OutOfVocabulary : public Error {
 public:
  OutOfVocabulary(std::string token, std::size_t position)
      : Error("out-of-vocabulary token \"" + token + "\" at position " +
              std::to_string(position)),
        token_(std::move(token)),
        position_(position) {}
  const std::string& token() const { return token_; }
  std::size_t position() const { return position_; }

 private:
  std::string token_;
  std::size_t position_;
};

class DimensionNotOne : public Error {
 public:
  using Error::Error;
};

class EmptyPrior : public Error {
 public:
  using Error::Error;
};

class LexiconMissingWord : public Error {
 public:
  using Error::Error;
};

class BudgetUnreachable : public Error {
 public:
  BudgetUnreachable(double epsilon, double loss)
      : Error("utility-loss budget unreachable: loss " + std::to_string(loss) +
              " at epsilon " + std::to_string(epsilon) +
              " after doubling cap"),
        epsilon_(epsilon),
        loss_(loss) {}
  double epsilon() const { return epsilon_; }
  double loss() const { return loss_; }

 private:
  double epsilon_;
  double loss_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

}  // namespace metricdp

#endif  // METRICDP_ERRORS_HPP_
