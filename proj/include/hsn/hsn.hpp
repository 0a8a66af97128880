/*
 Copyright 2026 The hsnorm Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef HSN_HSN_HPP
#define HSN_HSN_HPP

#include "hsn/common.hpp"
#include "hsn/matlin.hpp"
#include "hsn/sysmodel.hpp"
#include "hsn/quadrature.hpp"
#include "hsn/costshape.hpp"
#include "hsn/wick.hpp"
#include "hsn/riccati.hpp"
#include "hsn/simcheck.hpp"
#include "hsn/io.hpp"

#endif  // HSN_HSN_HPP
