/* Copyright 2026 The dagplace Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#if defined(__SSE__) || defined(_M_X64)
#include <xmmintrin.h>
#define DAGPLACE_HAS_MXCSR 1
#endif

namespace dagplace {

// Flushes subnormal results and operands to zero while in scope (x86 only).
// A saturated softmax otherwise produces long runs of subnormal arithmetic in
// the backward pass, which is orders of magnitude slower on common CPUs.
class FlushDenormals {
 public:
  FlushDenormals() {
#ifdef DAGPLACE_HAS_MXCSR
    saved_ = _mm_getcsr();
    _mm_setcsr(saved_ | 0x8040u);  // FTZ | DAZ
#endif
  }
  ~FlushDenormals() {
#ifdef DAGPLACE_HAS_MXCSR
    _mm_setcsr(saved_);
#endif
  }
  FlushDenormals(const FlushDenormals&) = delete;
  FlushDenormals& operator=(const FlushDenormals&) = delete;

 private:
  unsigned saved_ = 0;
};

}  // namespace dagplace
