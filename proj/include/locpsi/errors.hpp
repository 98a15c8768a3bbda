/*
 * Copyright 2026 The locpsi Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace locpsi {

// Base class for every error raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An input value is outside its permitted range (plaintext out of range,
// point outside the grid, bad key width, ...).
class RangeError : public Error {
 public:
  using Error::Error;
};

// A ciphertext or private key was combined with material produced under a
// different key.
class KeyMismatchError : public Error {
 public:
  using Error::Error;
};

// Two bit vectors (or a vector and a server) disagree about which grid they
// were encoded against.
class GridMismatchError : public Error {
 public:
  using Error::Error;
};

// A decrypted protocol value is impossible under honest execution, e.g. a
// decoded intersection bit outside {0,1}. Surfaced loudly, never clamped.
class ProtocolViolationError : public Error {
 public:
  using Error::Error;
};

// Malformed serialized data: wire messages, key files, grid specs, vectors.
class FormatError : public Error {
 public:
  using Error::Error;
};

// The platform entropy source failed.
class EntropyError : public Error {
 public:
  using Error::Error;
};

// Filesystem or socket failure.
class IoError : public Error {
 public:
  using Error::Error;
};

// An ERROR message received from a remote peer; carries the machine code.
class RemoteError : public Error {
 public:
  RemoteError(std::string code, const std::string& message)
      : Error(code + ": " + message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

}  // namespace locpsi
