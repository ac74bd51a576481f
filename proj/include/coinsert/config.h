// Copyright 2026 The coinsert Authors
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

#ifndef COINSERT_CONFIG_H_
#define COINSERT_CONFIG_H_

#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "coinsert/harness.h"
#include "coinsert/types.h"

namespace coinsert {

// Flat "key = value" configuration. Values may hold several numbers
// separated by spaces; '#' starts a comment. Every read marks the key as
// used so leftovers can be reported as unknown.
class ConfigFile {
 public:
  static ConfigFile Parse(std::istream& is, const std::string& source);
  static ConfigFile Load(const std::string& path);

  // Adds or replaces an entry, e.g. from a command-line override.
  void Set(const std::string& key, const std::string& value);
  // Parses "key=value".
  void SetAssignment(const std::string& assignment);

  bool Has(const std::string& key) const { return entries_.count(key) > 0; }

  // Each getter leaves the output untouched when the key is absent and
  // throws ConfigError when the value does not parse.
  void Get(const std::string& key, double* out);
  void Get(const std::string& key, int* out);
  void Get(const std::string& key, long* out);
  void Get(const std::string& key, std::uint64_t* out);
  void Get(const std::string& key, bool* out);
  void Get(const std::string& key, std::string* out);
  void Get(const std::string& key, Vec3* out);
  void Get(const std::string& key, Vec4* out);
  void Get(const std::string& key, std::vector<int>* out);

  // Throws ConfigError naming every key no getter asked for.
  void RequireAllUsed() const;

 private:
  struct Entry {
    std::string value;
    std::string where;  // "file:line" for messages
    bool used = false;
  };

  Entry* Find(const std::string& key);
  std::vector<double> Numbers(const std::string& key, const Entry& e) const;

  std::string source_;
  std::map<std::string, Entry> entries_;
};

// Reads every env./geometry./human./admittance./pgppo./guidance./train. key.
void ApplyTrainConfig(ConfigFile& file, TrainConfig* config);

}  // namespace coinsert

#endif  // COINSERT_CONFIG_H_
