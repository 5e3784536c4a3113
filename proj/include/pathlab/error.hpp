// Copyright 2026 The pathlab Authors
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

#ifndef PATHLAB__ERROR_HPP_
#define PATHLAB__ERROR_HPP_

#include <stdexcept>
#include <string>

namespace pathlab
{

/// Base of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument to a constructor or generator.
class ParameterError : public Error
{
public:
  using Error::Error;
};

/// Malformed input file (track CSV, profile CSV, trace CSV).
class FormatError : public Error
{
public:
  using Error::Error;
};

/// A closed-course segment list does not return to its start point.
class ClosureError : public Error
{
public:
  using Error::Error;
};

/// Non-finite or otherwise invalid vehicle state.
class StateError : public Error
{
public:
  using Error::Error;
};

/// The MPC could not produce a valid command.
class ControllerFault : public Error
{
public:
  using Error::Error;
};

/// Non-finite loss or parameters during DDPG training.
class TrainingFault : public Error
{
public:
  using Error::Error;
};

class CheckpointError : public Error
{
public:
  using Error::Error;
};

class ConfigError : public Error
{
public:
  using Error::Error;
};

class MetricsError : public Error
{
public:
  using Error::Error;
};

}  // namespace pathlab

#endif  // PATHLAB__ERROR_HPP_
