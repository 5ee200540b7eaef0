# Generated by nnport 0.1.0: pt/subclassing -> tf/sequential, pivot sha256 0c6a60776d9620b334e49d1fd39ca786cf6f25e5fc194719156d32c068c57a5b
import tensorflow as tf
from tensorflow import keras
from tensorflow.keras import layers

DATASETS = {
    "cifar10": ("data/cifar10", "classification", "images"),
    "svhn": ("data/svhn", "classification", "images"),
}


model = keras.Sequential(
    [
        keras.Input(shape=(32, 32, 3)),
        layers.Conv2D(filters=64, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu", name="conv1"),
        layers.Conv2D(filters=64, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu", name="conv2"),
        layers.MaxPooling2D(pool_size=(2, 2), strides=(2, 2), padding="valid", name="pool1"),
        layers.Conv2D(filters=128, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu", name="conv3"),
        layers.Conv2D(filters=128, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu", name="conv4"),
        layers.MaxPooling2D(pool_size=(2, 2), strides=(2, 2), padding="valid", name="pool2"),
        layers.Conv2D(filters=256, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu", name="conv5"),
        layers.Conv2D(filters=256, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu", name="conv6"),
        layers.Conv2D(filters=256, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu", name="conv7"),
        layers.MaxPooling2D(pool_size=(2, 2), strides=(2, 2), padding="valid", name="pool3"),
        layers.Conv2D(filters=512, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu", name="conv8"),
        layers.Conv2D(filters=512, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu", name="conv9"),
        layers.Conv2D(filters=512, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu", name="conv10"),
        layers.MaxPooling2D(pool_size=(2, 2), strides=(2, 2), padding="valid", name="pool4"),
        layers.Conv2D(filters=512, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu", name="conv11"),
        layers.Conv2D(filters=512, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu", name="conv12"),
        layers.Conv2D(filters=512, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu", name="conv13"),
        layers.MaxPooling2D(pool_size=(2, 2), strides=(2, 2), padding="valid", name="pool5"),
        layers.Flatten(name="flatten"),
        layers.Dropout(rate=0.5, name="drop1"),
        layers.Dense(units=512, activation="relu", name="fc1"),
        layers.Dropout(rate=0.5, name="drop2"),
        layers.Dense(units=512, activation="relu", name="fc2"),
        layers.Dropout(rate=0.5, name="drop3"),
        layers.Dense(units=10, name="fc3"),
    ],
    name="VGG16",
)


def train(model, x, y):
    model.compile(
        optimizer=keras.optimizers.SGD(learning_rate=0.01),
        loss=keras.losses.SparseCategoricalCrossentropy(from_logits=True),
    )
    model.fit(x, y, batch_size=64, epochs=10)
    return model.evaluate(x, y)
