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

#include "coref/log.h"

#include <iostream>
#include <mutex>
#include <utility>

namespace coref {
namespace {

std::mutex sink_mu;

WarningSink &Sink() {
  static WarningSink sink = [](const std::string &message) {
    std::cerr << "warning: " << message << "\n";
  };
  return sink;
}

}  // namespace

void Warn(const std::string &message) {
  std::lock_guard<std::mutex> lock(sink_mu);
  if (Sink()) Sink()(message);
}

WarningSink SetWarningSink(WarningSink sink) {
  std::lock_guard<std::mutex> lock(sink_mu);
  return std::exchange(Sink(), std::move(sink));
}

ScopedWarningCapture::ScopedWarningCapture() {
  previous_ = SetWarningSink(
      [this](const std::string &message) { warnings_.push_back(message); });
}

ScopedWarningCapture::~ScopedWarningCapture() {
  SetWarningSink(std::move(previous_));
}

}  // namespace coref
