// Copyright 2026 The s2e-coref Authors.
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

#ifndef COREF_LOG_H_
#define COREF_LOG_H_

#include <functional>
#include <string>
#include <vector>

namespace coref {

using WarningSink = std::function<void(const std::string &)>;

// Emits a warning through the installed sink (stderr by default).
void Warn(const std::string &message);

// Replaces the warning sink and returns the previous one. A null sink
// silences warnings.
WarningSink SetWarningSink(WarningSink sink);

// Restores the previous sink on destruction; collects warnings meanwhile.
class ScopedWarningCapture {
 public:
  ScopedWarningCapture();
  ~ScopedWarningCapture();
  ScopedWarningCapture(const ScopedWarningCapture &) = delete;
  ScopedWarningCapture &operator=(const ScopedWarningCapture &) = delete;

  const std::vector<std::string> &warnings() const { return warnings_; }

 private:
  std::vector<std::string> warnings_;
  WarningSink previous_;
};

}  // namespace coref

#endif  // COREF_LOG_H_
