"""
snnbench - MNIST Downloader
Fetches the gzip IDX files from a mirror into the dataset directory.
"""

import logging
from pathlib import Path
from typing import List, Optional, Union

import requests
from requests.adapters import HTTPAdapter
from urllib3.util.retry import Retry

from ..config import config
from ..exceptions import DownloadError
from .mnist import MNIST_FILES

logger = logging.getLogger("snnbench")


class MnistDownloader:
    """HTTP client for an MNIST mirror."""

    def __init__(
        self,
        mirror_url: Optional[str] = None,
        timeout: Optional[int] = None,
        max_retries: Optional[int] = None,
    ):
        """
        Initialize the downloader.

        Args:
            mirror_url: base URL holding ``<name>.gz`` files
                (reads SNNBENCH_DATA_MIRROR_URL if not provided)
            timeout: per-request timeout in seconds
            max_retries: retries on connection errors and 5xx responses
        """
        self.mirror_url = (mirror_url or config.data.mirror_url).rstrip("/")
        self.timeout = timeout or config.data.timeout
        retries = config.data.max_retries if max_retries is None else max_retries

        self.session = requests.Session()
        retry = Retry(
            total=retries,
            backoff_factor=0.5,
            status_forcelist=(500, 502, 503, 504),
            allowed_methods=("GET",),
        )
        self.session.mount("https://", HTTPAdapter(max_retries=retry))
        self.session.mount("http://", HTTPAdapter(max_retries=retry))

    def fetch_file(self, name: str, dest_dir: Union[str, Path]) -> Path:
        """
        Download one gzip IDX file.

        Args:
            name: IDX file name without the ``.gz`` suffix
            dest_dir: directory to write into

        Returns:
            Path of the written ``.gz`` file
        """
        url = f"{self.mirror_url}/{name}.gz"
        target = Path(dest_dir) / f"{name}.gz"
        try:
            response = self.session.get(url, timeout=self.timeout)
            response.raise_for_status()
        except requests.exceptions.RequestException as e:
            raise DownloadError(f"Download of {url} failed: {e}") from e

        target.write_bytes(response.content)
        logger.info(f"✓ Saved {url} to {target}")
        return target

    def download(self, dest_dir: Union[str, Path], force: bool = False) -> List[Path]:
        """
        Download all four MNIST files, skipping those already present.

        Example:
            >>> MnistDownloader().download("mnist")
        """
        dest = Path(dest_dir)
        dest.mkdir(parents=True, exist_ok=True)

        paths = []
        for name in MNIST_FILES:
            existing = [p for p in (dest / name, dest / f"{name}.gz") if p.exists()]
            if existing and not force:
                logger.info(f"{existing[0]} already present")
                paths.append(existing[0])
                continue
            paths.append(self.fetch_file(name, dest))
        return paths


def ensure_mnist(data_dir: Optional[Union[str, Path]] = None) -> Path:
    """Make sure the dataset directory holds all files, downloading if needed."""
    target = Path(data_dir or config.data.dir)
    MnistDownloader().download(target)
    return target
