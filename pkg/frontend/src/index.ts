export { ApiClient, ApiError, type ComposeParams, type FetchLike } from "./api.js";
export {
  buildGallery,
  displayQoS,
  serviceChain,
  type Gallery,
  type GalleryItem,
} from "./gallery.js";
export {
  LAYER_WIDTH,
  ROW_HEIGHT,
  renderWorkflow,
  toSvg,
  type DagEdge,
  type DagNode,
  type DagView,
  type EmptyView,
  type ErrorView,
  type WorkflowView,
} from "./render.js";
export {
  RequestBasket,
  parseRequests,
  requestKey,
  sameRequestSet,
} from "./requests.js";
export * from "./types.js";
export { SessionViewModel, type RefineFailure } from "./viewmodel.js";
