// Copyright 2026 The jtele Authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace jtele {

/// @brief Base of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

#define JTELE_DEFINE_ERROR(Name)                                               \
    class Name : public Error {                                                \
      public:                                                                  \
        explicit Name(const std::string &what)                                 \
            : Error(std::string(#Name ": ") + what) {}                         \
    };

JTELE_DEFINE_ERROR(DimensionError)
JTELE_DEFINE_ERROR(ConnectednessError)
JTELE_DEFINE_ERROR(InternalError)
JTELE_DEFINE_ERROR(PreconditionError)
JTELE_DEFINE_ERROR(NotScalarError)
JTELE_DEFINE_ERROR(StructureError)
JTELE_DEFINE_ERROR(MarkovError)
JTELE_DEFINE_ERROR(TraceError)
JTELE_DEFINE_ERROR(NormaliserError)
JTELE_DEFINE_ERROR(SchemeError)
JTELE_DEFINE_ERROR(HypothesisError)
JTELE_DEFINE_ERROR(ExtractionError)
JTELE_DEFINE_ERROR(ColouringError)
JTELE_DEFINE_ERROR(CertificateError)

#undef JTELE_DEFINE_ERROR

} // namespace jtele
