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

#include <charconv>
#include <sstream>
#include <string_view>

#include "coref/errors.h"
#include "coref/training.h"

namespace coref {
namespace {

std::string Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <class T>
T ParseNumber(const std::string &key, const std::string &value) {
  T out{};
  const char *end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw DomainError("config key '" + key + "': cannot parse '" + value + "'");
  }
  return out;
}

int ParsePositive(const std::string &key, const std::string &value,
                  bool allow_zero) {
  const int v = ParseNumber<int>(key, value);
  if (v < 0 || (v == 0 && !allow_zero)) {
    throw DomainError("config key '" + key + "' must be " +
                      (allow_zero ? ">= 0" : "> 0") + ", got " + value);
  }
  return v;
}

bool ParseBool(const std::string &key, const std::string &value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw DomainError("config key '" + key + "': expected true or false, got '" +
                    value + "'");
}

}  // namespace

void ApplyConfigValue(TrainConfig &config, const std::string &key,
                      const std::string &value) {
  if (key == "seed") {
    config.seed = ParseNumber<std::uint64_t>(key, value);
  } else if (key == "lambda") {
    const double v = ParseNumber<double>(key, value);
    if (!(v > 0.0 && v <= 1.0)) throw DomainError("lambda must lie in (0, 1]");
    config.lambda = v;
  } else if (key == "max_span_length") {
    config.max_span_length = ParsePositive(key, value, false);
  } else if (key == "head_dim") {
    config.head_dim = ParsePositive(key, value, true);
  } else if (key == "learning_rate") {
    const double v = ParseNumber<double>(key, value);
    if (!(v > 0.0)) throw DomainError("learning_rate must be > 0");
    config.adam.learning_rate = v;
  } else if (key == "beta1" || key == "beta2") {
    const double v = ParseNumber<double>(key, value);
    if (!(v >= 0.0 && v < 1.0)) throw DomainError(key + " must lie in [0, 1)");
    (key == "beta1" ? config.adam.beta1 : config.adam.beta2) = v;
  } else if (key == "adam_epsilon") {
    const double v = ParseNumber<double>(key, value);
    if (!(v > 0.0)) throw DomainError("adam_epsilon must be > 0");
    config.adam.epsilon = v;
  } else if (key == "epochs") {
    config.epochs = ParsePositive(key, value, false);
  } else if (key == "max_steps") {
    config.max_steps = ParsePositive(key, value, true);
  } else if (key == "token_budget") {
    config.token_budget = ParsePositive(key, value, false);
  } else if (key == "insert_speakers") {
    config.insert_speakers = ParseBool(key, value);
  } else if (key == "embedding_dim") {
    config.embedding_dim = ParsePositive(key, value, false);
  } else if (key == "train_path") {
    config.train_path = value;
  } else if (key == "dev_path") {
    config.dev_path = value;
  } else if (key == "embeddings_dir") {
    config.embeddings_dir = value;
  } else if (key == "output_path") {
    config.output_path = value;
  } else if (key == "log_path") {
    config.log_path = value;
  } else {
    throw DomainError("unknown config key '" + key + "'");
  }
}

TrainConfig ParseTrainConfig(const std::string &text) {
  TrainConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    const std::string body = Trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw DomainError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    ApplyConfigValue(config, Trim(std::string_view(body).substr(0, eq)),
                     Trim(std::string_view(body).substr(eq + 1)));
  }
  return config;
}

}  // namespace coref
