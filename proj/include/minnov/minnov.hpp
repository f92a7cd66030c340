/*
 Copyright 2026 The minnov Authors

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
#ifndef MINNOV_MINNOV_HPP
#define MINNOV_MINNOV_HPP

#include "minnov/csv.hpp"
#include "minnov/errors.hpp"
#include "minnov/lti.hpp"
#include "minnov/netgen.hpp"
#include "minnov/novelty.hpp"
#include "minnov/signal.hpp"

#endif  // MINNOV_MINNOV_HPP
