import { ApiClient, ApiError } from "./api.js";
import { buildGallery, type Gallery } from "./gallery.js";
import { renderWorkflow, type WorkflowView } from "./render.js";
import { RequestBasket } from "./requests.js";
import type { RegistryDoc, SessionDoc, WorkflowDoc } from "./types.js";

export interface RefineFailure {
  /** "no workflow satisfies these requests" banner with the offending set. */
  message: string;
  requests: ReturnType<RequestBasket["serialize"]>;
}

/** Page-level state for one refinement session.  Holds no business logic:
 * planning, scoring, and constraint checking stay server-side; this object
 * only orchestrates API calls and keeps the latest consistent snapshot. */
export class SessionViewModel {
  session: SessionDoc | null = null;
  gallery: Gallery | null = null;
  lastFailure: RefineFailure | null = null;
  readonly basket = new RequestBasket();
  private registry: RegistryDoc | undefined;
  /** Monotone sequence number; responses of superseded refine calls are
   * discarded so at most one in-flight request ever lands. */
  private refineSeq = 0;

  constructor(
    private readonly api: ApiClient,
    private readonly sessionId: string,
  ) {}

  attachRegistry(doc: RegistryDoc): void {
    this.registry = doc;
  }

  async load(): Promise<SessionDoc> {
    this.session = await this.api.getSession(this.sessionId);
    return this.session;
  }

  /** The rendered DAG of the session's current workflow. */
  currentView(): WorkflowView {
    if (this.session === null) {
      return { kind: "empty", message: "session not loaded" };
    }
    return renderWorkflow(this.session.current, this.registry);
  }

  /** Submit the basket; resolves to the gallery, or null when this call was
   * superseded by a newer one before its response arrived. */
  async submit(
    options: { mode?: "approx" | "exact"; horizon?: number } = {},
  ): Promise<Gallery | null> {
    const requests = this.basket.serialize();
    const seq = ++this.refineSeq;
    this.lastFailure = null;
    let response;
    try {
      response = await this.api.refine(this.sessionId, requests, options);
    } catch (err) {
      if (seq !== this.refineSeq) return null; // stale failure: ignore
      if (err instanceof ApiError && err.code === "no_candidate") {
        this.lastFailure = {
          message: "no workflow satisfies these requests",
          requests,
        };
        this.gallery = null;
        return null;
      }
      throw err;
    }
    if (seq !== this.refineSeq) return null; // stale success: discard
    this.gallery = buildGallery(response);
    return this.gallery;
  }

  /** Commit a gallery candidate; the server is the source of truth, so the
   * session snapshot is replaced by the server's response. */
  async select(workflow: WorkflowDoc): Promise<SessionDoc> {
    this.session = await this.api.select(
      this.sessionId,
      workflow,
      this.basket.serialize(),
    );
    this.basket.clear();
    this.gallery = null;
    return this.session;
  }
}
