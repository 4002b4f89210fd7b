// SPDX-FileCopyrightText: Copyright (c) 2026 The sddi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sddi {

struct HttpResponse {
  long status = 0;
  std::vector<std::uint8_t> body;
};

//! Blocking GET. Implementations throw FetchError on transport failures
//! (DNS, connect, timeout); HTTP error statuses are returned, not thrown.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse get(const std::string& url) = 0;
};

class CurlTransport final : public HttpTransport {
 public:
  explicit CurlTransport(std::chrono::seconds timeout = std::chrono::seconds(30));
  ~CurlTransport() override;
  CurlTransport(const CurlTransport&) = delete;
  CurlTransport& operator=(const CurlTransport&) = delete;

  HttpResponse get(const std::string& url) override;

 private:
  void* handle_;
  std::chrono::seconds timeout_;
};

//! Time source used for throttling and backoff; swapped out in tests.
class Clock {
 public:
  using duration = std::chrono::nanoseconds;
  virtual ~Clock() = default;
  virtual duration now() = 0;
  virtual void sleep_for(duration d) = 0;
};

class SteadyClock final : public Clock {
 public:
  duration now() override;
  void sleep_for(duration d) override;
};

struct FetchOptions {
  std::string image_size = "500x500";
  std::chrono::milliseconds min_interval{200};  // 5 requests per second
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
};

std::string pubchem_png_url(const std::string& cid, const std::string& image_size);
bool is_valid_cid(const std::string& cid);

class PubchemFetcher {
 public:
  PubchemFetcher(HttpTransport& transport, Clock& clock, FetchOptions options = {});

  //! Downloads `<out_dir>/<cid>.png` unless it already exists. Throws
  //! std::invalid_argument for a non-numeric CID before any request,
  //! FetchError for "unknown CID" (404), exhausted retries or other HTTP
  //! errors, and IngestionError when the body is not a PNG.
  std::filesystem::path fetch(const std::string& cid, const std::filesystem::path& out_dir);

  std::size_t requests_made() const { return requests_; }

 private:
  HttpResponse throttled_get(const std::string& url);

  HttpTransport& transport_;
  Clock& clock_;
  FetchOptions options_;
  std::optional<Clock::duration> last_request_;
  std::size_t requests_ = 0;
};

//! Convenience wrapper over a libcurl transport and the steady clock.
std::filesystem::path fetch_pubchem_png(const std::string& cid, const std::filesystem::path& out_dir,
                                        const std::string& image_size = "500x500");

}  // namespace sddi
