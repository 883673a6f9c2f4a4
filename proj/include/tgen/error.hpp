// Copyright 2026 The tgen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TGEN__ERROR_HPP_
#define TGEN__ERROR_HPP_

#include <stdexcept>
#include <string>

namespace tgen
{

struct Error : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

// Document is structurally wrong (missing field, wrong type, ragged lengths).
struct SchemaError : Error
{
  using Error::Error;
};

// A field is present but its value is out of domain (NaN, negative dt, ...)
struct ValueError : Error
{
  using Error::Error;
};

// A referenced id (lane, track) does not resolve.
struct RefError : Error
{
  using Error::Error;
};

struct IntervalError : Error
{
  using Error::Error;
};

struct ShapeError : Error
{
  using Error::Error;
};

struct EmptyError : Error
{
  using Error::Error;
};

struct ExhaustedError : Error
{
  using Error::Error;
};

struct MissingVehicleError : Error
{
  using Error::Error;
};

struct LengthError : Error
{
  using Error::Error;
};

struct AlignError : Error
{
  using Error::Error;
};

struct DivergenceError : Error
{
  using Error::Error;
};

}  // namespace tgen

#endif  // TGEN__ERROR_HPP_
