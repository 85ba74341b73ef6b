import type { WorkbenchClient } from "./api.js";
import { ServiceError } from "./api.js";
import { debounceLatest, LatestWins } from "./debounce.js";
import { validatePattern } from "./editor.js";
import type { ClassifyRequest, ClassifyResponse } from "./types.js";

export interface RescoreHandlers {
  onResult: (response: ClassifyResponse, request: ClassifyRequest) => void;
  onError: (status: number, detail: string) => void;
  onInvalidDraft?: (diagnostic: string) => void;
}

export interface Rescorer {
  /** Call on every keystroke/toggle; collapses into one trailing request. */
  edit(request: ClassifyRequest): void;
  cancel(): void;
  flush(): void;
}

/** The editor loop: debounce rapid edits into a single classify call and
 * drop responses that a newer edit has superseded. */
export function createRescorer(
  client: WorkbenchClient,
  handlers: RescoreHandlers,
  waitMs = 250,
): Rescorer {
  const tickets = new LatestWins();

  const send = (request: ClassifyRequest) => {
    const validation = validatePattern(request.template_pattern);
    if (!validation.ok) {
      handlers.onInvalidDraft?.(validation.diagnostic ?? "invalid template");
      return;
    }
    const ticket = tickets.issue();
    client
      .classify(request)
      .then((response) => {
        if (tickets.isCurrent(ticket)) handlers.onResult(response, request);
      })
      .catch((error: unknown) => {
        if (!tickets.isCurrent(ticket)) return;
        if (error instanceof ServiceError) {
          handlers.onError(error.status, error.detail);
        } else {
          handlers.onError(0, String(error));
        }
      });
  };

  const debounced = debounceLatest(send, waitMs);
  return {
    edit: (request) => debounced(request),
    cancel: () => debounced.cancel(),
    flush: () => debounced.flush(),
  };
}
