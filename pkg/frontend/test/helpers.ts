// Fixture loading for the specs. Every JSON file under fixtures/ was captured
// verbatim from a live service session, so the tests exercise the exact
// payloads the browser will see.

import { readFileSync } from "node:fs";

export const fixture = <T>(name: string): T =>
  JSON.parse(
    readFileSync(new URL(`./fixtures/${name}`, import.meta.url), "utf8"),
  ) as T;
