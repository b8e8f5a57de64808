/* Copyright 2026 The vislab Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Compiles the public header as C and drives one call sequence. */
#include <stdio.h>
#include <string.h>

#include "vislab/vislab.h"

int main(void) {
  vislab_config* cfg = NULL;
  vislab_string* json = NULL;
  if (strlen(vislab_version()) == 0) return 1;
  if (vislab_config_preset("smoke", &cfg) != VISLAB_OK) return 1;
  if (vislab_config_override(cfg, "grid.n", "16") != VISLAB_OK) return 1;
  if (vislab_config_to_json(cfg, &json) != VISLAB_OK) return 1;
  if (strstr(vislab_string_data(json), "\"n\": 16") == NULL) return 1;
  vislab_string_free(json);
  if (vislab_config_override(cfg, "grid.n", "3") != VISLAB_OK) return 1;
  if (vislab_config_validate(cfg) != VISLAB_ERR_CONFIG) return 1;
  printf("%s\n", vislab_last_error());
  vislab_config_free(cfg);
  return 0;
}
